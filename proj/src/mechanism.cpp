#include "robustprice/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustprice/golden.hpp"

namespace robustprice {

Mechanism::Mechanism(std::vector<double> atoms, std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  if (atoms_.size() != probs_.size()) throw DomainError("mechanism: atoms and probs differ in length");
  double total = 0.0;
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    if (!(atoms_[j] > 0.0) || std::isinf(atoms_[j])) throw DomainError("mechanism: atoms must be positive and finite");
    if (j > 0 && !(atoms_[j] > atoms_[j - 1])) throw DomainError("mechanism: atoms must be strictly increasing");
    if (!(probs_[j] >= 0.0 && probs_[j] <= 1.0)) throw DomainError("mechanism: probabilities must lie in [0,1]");
    total += probs_[j];
  }
  if (total > 1.0 + 1e-12) throw DomainError("mechanism: probabilities sum to more than one");
}

Mechanism Mechanism::deterministic(double price) { return Mechanism({price}, {1.0}); }

double Mechanism::total_mass() const { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

Mechanism Mechanism::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("mechanism: scale factor must be positive");
  std::vector<double> atoms(atoms_);
  for (double& a : atoms) a *= factor;
  return Mechanism(std::move(atoms), probs_);
}

Mechanism Mechanism::pruned(double threshold) const {
  std::vector<double> atoms;
  std::vector<double> probs;
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    if (probs_[j] > threshold) {
      atoms.push_back(atoms_[j]);
      probs.push_back(probs_[j]);
    }
  }
  return Mechanism(std::move(atoms), std::move(probs));
}

double revenue_ratio(const Mechanism& m, const WorstCaseDistribution& d) {
  double revenue = 0.0;
  const auto atoms = m.atoms();
  const auto probs = m.probs();
  for (std::size_t j = 0; j < atoms.size(); ++j) revenue += probs[j] * atoms[j] * d.survival(atoms[j]);
  return revenue / d.oracle_revenue();
}

namespace {

// Generalized Pareto survival specialized on the class branch; avoids the
// argument checks of gamma() in the inner loops.
struct GammaEval {
  explicit GammaEval(Alpha alpha)
      : exponential(alpha.is_exponential()), regular(alpha.value() == 0.0), s(1.0 - alpha.value()) {}

  double operator()(double x) const {
    if (exponential) return std::exp(-x);
    if (regular) return 1.0 / (1.0 + x);
    return std::exp(-std::log1p(s * x) / s);
  }

  bool exponential;
  bool regular;
  double s;
};

struct Candidate {
  double ratio;
  double r;
  Side side;
};

bool at_price(double a, double w) { return std::abs(a - w) <= 1e-12 * w; }

// Left family: members start at r in [r_l, w] and carry an atom of size q at w.
class LeftObjective {
 public:
  LeftObjective(const Mechanism& m, const PricingContext& ctx, double q)
      : atoms_(m.atoms()), probs_(m.probs()), w_(ctx.w()), q_(q), gamma_(ctx.alpha()),
        scale_(gamma_inv(ctx.alpha(), q)) {
    // Atoms strictly below w feed the kernel; the atom at w sells with
    // probability q whatever r is; atoms above w never sell.
    below_w_ = 0;
    while (below_w_ < atoms_.size() && atoms_[below_w_] < w_ && !at_price(atoms_[below_w_], w_)) ++below_w_;
    if (below_w_ < atoms_.size() && at_price(atoms_[below_w_], w_)) at_w_revenue_ = w_ * q_ * probs_[below_w_];
    prefix_.assign(below_w_ + 1, 0.0);
    for (std::size_t j = 0; j < below_w_; ++j) prefix_[j + 1] = prefix_[j] + atoms_[j] * probs_[j];
  }

  std::size_t kernel_atoms() const { return below_w_; }
  std::span<const double> atoms() const { return atoms_.subspan(0, below_w_); }

  // Value at r, where atoms [0, split) are at or below r and the rest above.
  double operator()(double r, std::size_t split) const {
    double total = prefix_[split] + at_w_revenue_;
    if (r < w_) {
      const double t = scale_ / (w_ - r);
      for (std::size_t j = split; j < below_w_; ++j) total += atoms_[j] * probs_[j] * gamma_(t * (atoms_[j] - r));
    }
    return total / r;
  }

 private:
  std::span<const double> atoms_;
  std::span<const double> probs_;
  double w_;
  double q_;
  GammaEval gamma_;
  double scale_;
  std::size_t below_w_ = 0;
  double at_w_revenue_ = 0.0;
  std::vector<double> prefix_;
};

Candidate minimize_left(const Mechanism& m, const PricingContext& ctx, const NatureOptions& options) {
  const double w = ctx.w();
  const double q = ctx.q_min();
  const double r_low = reserve_bounds(ctx.alpha(), w, q).low;
  const LeftObjective objective(m, ctx, q);
  const auto atoms = objective.atoms();

  std::vector<double> breaks{r_low};
  for (double a : atoms)
    if (a > r_low) breaks.push_back(a);
  breaks.push_back(w);

  const int scan = std::max(options.scan_points, 3);
  const double tol = options.tol * w;
  Candidate best{kInf, r_low, Side::Left};
  std::vector<Candidate> per_segment;
  per_segment.reserve(breaks.size());
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = breaks[k];
    const double hi = breaks[k + 1];
    if (!(hi > lo)) continue;
    // Atoms at or below lo count in full over the whole segment.
    const auto split = static_cast<std::size_t>(std::upper_bound(atoms.begin(), atoms.end(), lo) - atoms.begin());
    auto f = [&](double r) { return objective(r, split); };
    int best_i = 0;
    double best_v = kInf;
    const double step = (hi - lo) / (scan - 1);
    for (int i = 0; i < scan; ++i) {
      const double r = i + 1 == scan ? hi : lo + step * i;
      const double v = f(r);
      if (v < best_v) {
        best_v = v;
        best_i = i;
      }
    }
    Candidate seg{best_v, best_i + 1 == scan ? hi : lo + step * best_i, Side::Left};
    if (hi - lo > tol) {
      const double a = lo + step * std::max(best_i - 1, 0);
      const double b = std::min(hi, lo + step * (best_i + 1));
      const auto refined = golden_section_minimize(f, a, b, tol);
      if (refined.value < seg.ratio) seg = {refined.value, refined.x, Side::Left};
    }
    per_segment.push_back(seg);
    if (seg.ratio < best.ratio) best = seg;
  }
  // Smallest r whose value ties the minimum.
  for (const auto& c : per_segment) {
    if (c.ratio <= best.ratio + 1e-12) return {best.ratio, c.r, Side::Left};
  }
  return best;
}

Candidate minimize_right(const Mechanism& m, const PricingContext& ctx, double top, bool unbounded_limit) {
  const double w = ctx.w();
  const double q = ctx.q_max();
  const GammaEval gamma_eval(ctx.alpha());
  const double scale = gamma_inv(ctx.alpha(), q) / w;
  auto revenue = [&](double v) { return v * gamma_eval(scale * v); };
  // Supremum of the revenue curve, reached as r -> inf in the regular case.
  const double limit_revenue = w * q / (1.0 - q);

  const auto atoms = m.atoms();
  const auto probs = m.probs();
  double numer = 0.0;
  std::size_t j = 0;
  for (; j < atoms.size() && (atoms[j] <= w || at_price(atoms[j], w)); ++j) numer += probs[j] * revenue(atoms[j]);

  Candidate best{numer / revenue(w), w, Side::Right};
  auto consider = [&](double ratio, double r) {
    if (ratio < best.ratio - 1e-12) best = {ratio, r, Side::Right};
  };
  // Between atoms the numerator is constant and the denominator increases,
  // so the infimum sits at left limits of atoms and at the top of the range.
  for (; j < atoms.size() && atoms[j] <= top; ++j) {
    consider(numer / revenue(atoms[j]), atoms[j]);
    numer += probs[j] * revenue(atoms[j]);
  }
  if (unbounded_limit) {
    consider(numer / limit_revenue, kInf);
  } else {
    consider(numer / revenue(top), top);
  }
  return best;
}

}  // namespace

EvaluationReport nature_worst_case(const Mechanism& m, const PricingContext& ctx, const NatureOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("nature_worst_case: tol must be positive");
  const double w = ctx.w();
  const double r_low = ctx.r_low();
  if (m.empty() || m.total_mass() == 0.0) return {0.0, r_low, Side::Left, 0.0};

  const Candidate left = minimize_left(m, ctx, options);
  Candidate best = left;
  double slack = 0.0;

  const double r_high = ctx.r_high();
  if (r_high > w) {
    double top = r_high;
    bool unbounded_limit = false;
    if (std::isinf(r_high)) {
      double cap = options.r_cap;
      if (cap <= 0.0) cap = 1e4 * w;
      if (!(cap > w)) throw DomainError("nature_worst_case: r_cap must exceed w");
      if (std::isinf(cap)) {
        unbounded_limit = true;
      } else {
        top = cap;
        const double q = ctx.q_max();
        slack = 1.0 / (q * (1.0 + (1.0 / q - 1.0) * cap / w));
      }
    }
    const Candidate right = minimize_right(m, ctx, top, unbounded_limit);
    if (right.ratio < best.ratio - 1e-12) best = right;
  }
  return {std::max(best.ratio, 0.0), best.r, best.side, slack};
}

Mechanism log_uniform_mechanism(const PricingContext& ctx, int grid_n) {
  if (grid_n < 1) throw DomainError("log_uniform_mechanism: grid_n must be positive");
  const double w = ctx.w();
  const double q = ctx.q();
  const double log_range = -std::log(q);
  const double h = log_range / grid_n;
  std::vector<double> atoms(grid_n);
  std::vector<double> probs(grid_n, 1.0 / grid_n);
  for (int k = 0; k < grid_n; ++k) {
    const double lo = w * q * std::exp(h * k);
    // Conditional mean of the density 1/(u log(1/q)) on [lo, lo e^h].
    atoms[k] = lo * std::expm1(h) / h;
  }
  return Mechanism(std::move(atoms), std::move(probs));
}

double tail_weighted_default_a(double q) {
  if (!(q > 0.5 && q < 1.0)) throw DomainError("tail_weighted_default_a: q must lie in (1/2, 1)");
  const double log_term = -std::log1p(-q);
  return q / (2.0 * (q - 0.5) * log_term + q);
}

Mechanism tail_weighted_mechanism(const PricingContext& ctx, double a, int grid_n) {
  if (ctx.alpha().value() != 0.0) throw DomainError("tail_weighted_mechanism: regular class only");
  const double q = ctx.q();
  if (!(q > 0.5)) throw DomainError("tail_weighted_mechanism: requires q > 1/2");
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("tail_weighted_mechanism: a must lie in [0,1]");
  if (grid_n < 1) throw DomainError("tail_weighted_mechanism: grid_n must be positive");
  const double w = ctx.w();
  const double log_total = -std::log1p(-q);  // log of R(inf) / R(w)
  const double b = (1.0 - a) / log_total;

  std::vector<double> atoms{w};
  std::vector<double> probs{a};
  if (b > 0.0) {
    // Normalized revenue curve R(u) = q u / (q + (1-q) u) rises from q at
    // u = 1 to q / (1-q). Segments have equal width in log R; each is
    // collapsed to the price whose revenue equals the segment's mean revenue
    // under the log-derivative density, so a completed segment contributes
    // exactly b * (R_hi - R_lo).
    const double step = log_total / grid_n;
    const double mass = b * step;
    for (int k = 0; k < grid_n; ++k) {
      const double r_lo = q * std::exp(step * k);
      const double r_hi = q * std::exp(step * (k + 1));
      const double mean_revenue = (r_hi - r_lo) / step;
      const double u = mean_revenue * q / (q - (1.0 - q) * mean_revenue);
      if (!(u > 1.0) || std::isinf(u)) continue;
      atoms.push_back(w * u);
      probs.push_back(mass);
    }
  }
  if (a == 0.0) {
    atoms.erase(atoms.begin());
    probs.erase(probs.begin());
  }
  // Rounding in the equal-mass split can push the total a hair above one.
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (total > 1.0) {
    for (double& p : probs) p /= total;
  }
  return Mechanism(std::move(atoms), std::move(probs));
}

}  // namespace robustprice
