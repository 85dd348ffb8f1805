#include "robustprice/deterministic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robustprice/golden.hpp"

namespace robustprice {

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::LowQ:
      return "low";
    case Regime::MidQ:
      return "mid";
    case Regime::HighQ:
      return "high";
  }
  return "unknown";
}

const char* to_string(SolveMethod method) {
  return method == SolveMethod::ClosedForm ? "closed_form" : "search";
}

namespace {

void check_inputs(double w, double q) {
  // Validates through the context constructor so degenerate rates raise the
  // same error everywhere.
  (void)PricingContext::point(Alpha(0.0), w, q);
}

}  // namespace

DeterministicSolution solve_regular(double w, double q) {
  check_inputs(w, q);
  if (q <= 0.25) {
    const double s = std::sqrt(q);
    const double ratio = 2.0 * s / (1.0 + s);
    return {w * ratio, ratio, Regime::LowQ, SolveMethod::ClosedForm};
  }
  if (q <= 0.5) {
    return {w * q * (3.0 - 4.0 * q) / (1.0 - q), (3.0 - 4.0 * q) / (4.0 * (1.0 - q)), Regime::MidQ,
            SolveMethod::ClosedForm};
  }
  return {w, 1.0 - q, Regime::HighQ, SolveMethod::ClosedForm};
}

double mhr_beta(double q, double x) {
  const double wx = lambert_w(x);
  return 1.0 - (wx + 1.0 / wx - 2.0) / -std::log(q);
}

double mhr_q_hat() {
  static const double q_hat = [] {
    auto f = [](double q) { return lambert_w(1.0 / -std::log(q)) * lambert_w(std::numbers::e / q) - 1.0; };
    double lo = 0.3;
    double hi = 0.7;
    // f(lo) < 0 < f(hi): the product increases through 1 on this bracket.
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return q_hat;
}

DeterministicSolution solve_mhr(double w, double q) {
  check_inputs(w, q);
  const double log_inv_q = -std::log(q);
  if (q <= mhr_q_hat()) {
    const double b = mhr_beta(q, std::numbers::e / q);
    return {w * b, b, Regime::LowQ, SolveMethod::ClosedForm};
  }
  if (q <= std::exp(-std::exp(-1.0))) {
    const double x = 1.0 / log_inv_q;
    const double wx = lambert_w(x);
    const double b = mhr_beta(q, x);
    const double ratio = b * (q / std::numbers::e) * std::exp(1.0 / wx) / wx;
    return {w * b, ratio, Regime::MidQ, SolveMethod::ClosedForm};
  }
  return {w, std::numbers::e * q * log_inv_q, Regime::HighQ, SolveMethod::ClosedForm};
}

double mu(Alpha alpha, double q, double p) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("mu: q must lie in (0,1)");
  const double r_low = reserve_bounds(alpha, 1.0, q).low;
  if (!(p >= r_low * (1.0 - 1e-12) && p <= 1.0)) throw DomainError("mu: p must lie in [r_l, 1]");
  const double g = gamma_inv(alpha, q);
  const double a = alpha.is_exponential() ? 1.0 : alpha.value();
  const double q_pow = std::pow(q, a - 1.0);
  const double x = a * g * (1.0 - p);
  const double value = 1.0 - (std::sqrt(x * x + 4.0 * g * (1.0 - p) * q_pow) - x) / (2.0 * q_pow);
  return std::clamp(value, r_low, p);
}

namespace {

// Worst-case ratio of posting p (normalized w = 1) as the minimum of the
// three regimes: oracle price below p, between p and w, and above w.
struct DeterministicObjective {
  DeterministicObjective(Alpha alpha, double q)
      : alpha(alpha), q(q), g(gamma_inv(alpha, q)), r_low(reserve_bounds(alpha, 1.0, q).low) {
    const double a = alpha.is_exponential() ? 1.0 : alpha.value();
    has_right = a * g < 1.0;
    if (alpha.is_exponential()) {
      right_factor = std::numbers::e * g;
    } else if (a == 0.0) {
      right_factor = g;
    } else {
      right_factor = std::pow(a, a / (a - 1.0)) * g;
    }
  }

  double left_term(double p) const {
    if (p >= 1.0) return q;
    const double m = mu(alpha, q, p);
    if (m >= p) return 1.0;
    return p * hbar(alpha, {m, 1.0}, {1.0, q}, p) / m;
  }

  double right_term(double p) const {
    if (!has_right) return kInf;
    return p * right_factor * hbar(alpha, {0.0, 1.0}, {1.0, q}, p);
  }

  double operator()(double p) const { return std::min({left_term(p), right_term(p), p}); }

  Alpha alpha;
  double q;
  double g;
  double r_low;
  bool has_right = false;
  double right_factor = 0.0;
};

}  // namespace

DeterministicSolution solve_general(const PricingContext& ctx, double tol) {
  if (!(tol > 0.0)) throw DomainError("solve_general: tol must be positive");
  const double q = ctx.q();
  const DeterministicObjective objective(ctx.alpha(), q);
  const double lo = objective.r_low;
  constexpr int kGrid = 2048;
  const double step = (1.0 - lo) / (kGrid - 1);
  int best_i = 0;
  double best_v = -kInf;
  for (int i = 0; i < kGrid; ++i) {
    const double p = i + 1 == kGrid ? 1.0 : lo + step * i;
    const double v = objective(p);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  double price = best_i + 1 == kGrid ? 1.0 : lo + step * best_i;
  double ratio = best_v;
  const double a = lo + step * std::max(best_i - 1, 0);
  const double b = std::min(1.0, lo + step * (best_i + 1));
  const auto refined = golden_section_minimize([&](double p) { return -objective(p); }, a, b, tol);
  if (-refined.value > ratio) {
    price = refined.x;
    ratio = -refined.value;
  }

  Regime regime = Regime::MidQ;
  if (price >= 1.0 - 1e-6) {
    regime = Regime::HighQ;
  } else if (std::abs(ratio - price) <= 1e-6) {
    regime = Regime::LowQ;
  }
  return {price * ctx.w(), ratio, regime, SolveMethod::Search};
}

DeterministicSolution solve_deterministic(const PricingContext& ctx) {
  const double a = ctx.alpha().value();
  if (a == 0.0) return solve_regular(ctx.w(), ctx.q());
  if (ctx.alpha().is_exponential()) return solve_mhr(ctx.w(), ctx.q());
  return solve_general(ctx);
}

}  // namespace robustprice
