#include "robustprice/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace robustprice {

using linprog::DenseMatrix;

PriceGrid build_grid(const PricingContext& ctx, int n, double eta, double b) {
  if (n < 2) throw DomainError("build_grid: n must be at least 2");
  if (!(b > 1.0)) throw DomainError("build_grid: b must exceed 1");
  const double r_low = reserve_bounds(ctx.alpha(), 1.0, ctx.q_min()).low;
  const double r_high = reserve_bounds(ctx.alpha(), 1.0, ctx.q_max()).high;
  if (!(eta > 0.0 && eta < 1.0 - r_low)) throw DomainError("build_grid: eta must lie in (0, 1 - r_l)");

  PriceGrid grid;
  grid.n = n;
  grid.eta = eta;
  grid.b = b;
  grid.r_high = r_high;
  grid.points.reserve(2 * static_cast<std::size_t>(n) + 2);
  const double low_span = 1.0 - eta - r_low;
  for (int i = 0; i <= n; ++i) grid.points.push_back(i == n ? 1.0 - eta : r_low + low_span * i / n);
  grid.split_index = grid.points.size();
  grid.collapsed = r_high <= 1.0 + eta;
  if (grid.collapsed) {
    grid.points.push_back(1.0);
  } else {
    const double top = std::min(b, r_high);
    for (int i = 0; i <= n; ++i) grid.points.push_back(i == n ? top : 1.0 + (top - 1.0) * i / n);
  }
  for (std::size_t i = 1; i < grid.points.size(); ++i) {
    grid.max_gap = std::max(grid.max_gap, grid.points[i] - grid.points[i - 1]);
  }
  return grid;
}

PriceGrid build_grid(const PricingContext& ctx, const LpOptions& options) {
  return build_grid(ctx, options.n, options.eta, options.b);
}

namespace {

// Normalized (w = 1) kernels of the two sides.
struct Curves {
  Curves(const PricingContext& ctx, const PriceGrid& grid)
      : alpha(ctx.alpha()),
        q_left(ctx.q_min()),
        q_right(ctx.q_max()),
        g_left(gamma_inv(alpha, q_left)),
        g_right(gamma_inv(alpha, q_right)),
        has_right(grid.r_high > 1.0) {
    if (!has_right) return;
    // Supremum of the right revenue curve; the alpha = 0 curve only reaches
    // it in the limit.
    tail_revenue = std::isinf(grid.r_high) ? q_right / (1.0 - q_right) : right_revenue(grid.r_high);
  }

  // u * hbar(u | (x,1), (1,q_left)) for u >= x.
  double left_revenue(double x, double u) const { return u * gamma(alpha, g_left * (u - x) / (1.0 - x)); }
  // v * hbar(v | (0,1), (1,q_right)).
  double right_revenue(double v) const { return v * gamma(alpha, g_right * v); }

  Alpha alpha;
  double q_left;
  double q_right;
  double g_left;
  double g_right;
  bool has_right;
  double tail_revenue = 0.0;
};

void check_grid(const PricingContext& ctx, const PriceGrid& grid) {
  const std::size_t n = static_cast<std::size_t>(grid.n);
  const std::size_t expected = grid.collapsed ? n + 2 : 2 * n + 2;
  if (grid.n < 2 || grid.points.size() != expected || grid.split_index != n + 1) {
    throw DomainError("price grid is malformed");
  }
  const double r_low = reserve_bounds(ctx.alpha(), 1.0, ctx.q_min()).low;
  if (std::abs(grid.points.front() - r_low) > 1e-12) throw DomainError("price grid was built for another context");
}

}  // namespace

DenseMatrix lower_payoff(const PricingContext& ctx, const PriceGrid& grid) {
  check_grid(ctx, grid);
  const Curves curves(ctx, grid);
  const auto& a = grid.points;
  const std::size_t n = static_cast<std::size_t>(grid.n);
  const std::size_t k = a.size();
  const std::size_t right_rows = curves.has_right ? (grid.collapsed ? 0 : n - 1) + 1 : 0;
  DenseMatrix m(n + 1 + right_rows, k);

  // Nature's oracle price in [a_i, a_{i+1}]: atoms at or below a_i always
  // sell; atoms above sell at least as often as against a left member at a_i.
  for (std::size_t i = 0; i <= n; ++i) {
    const double inv = 1.0 / a[i + 1];
    double* row = m.row(i);
    for (std::size_t j = 0; j <= i; ++j) row[j] = a[j] * inv;
    for (std::size_t j = i + 1; j <= n; ++j) row[j] = curves.left_revenue(a[i], a[j]) * inv;
  }
  if (!curves.has_right) return m;

  std::vector<double> revenue(k);
  for (std::size_t j = 0; j < k; ++j) revenue[j] = curves.right_revenue(a[j]);
  std::size_t r = n + 1;
  if (!grid.collapsed) {
    // Oracle price in (a_i, a_{i+1}]: atoms below a_{i+1} sell along the
    // right kernel, and the oracle earns at most R(a_{i+1}).
    for (std::size_t i = n + 1; i <= 2 * n - 1; ++i, ++r) {
      const double inv = 1.0 / revenue[i + 1];
      double* row = m.row(r);
      for (std::size_t j = 0; j <= i; ++j) row[j] = revenue[j] * inv;
    }
  }
  // Oracle prices beyond the last constrained point, up to r_h.
  const std::size_t last = grid.collapsed ? n + 1 : 2 * n;
  double* row = m.row(r);
  for (std::size_t j = 0; j <= last; ++j) row[j] = revenue[j] / curves.tail_revenue;
  return m;
}

DenseMatrix upper_payoff(const PricingContext& ctx, const PriceGrid& grid) {
  check_grid(ctx, grid);
  const Curves curves(ctx, grid);
  const auto& a = grid.points;
  const std::size_t n = static_cast<std::size_t>(grid.n);
  const std::size_t k = a.size();
  const std::size_t right_rows = curves.has_right ? (grid.collapsed ? 0 : n) + 1 : 0;
  DenseMatrix m(n + 1 + right_rows, k);

  // p_j is the mass on [a_j, a_{j+1}); nature's oracle price in [a_i, a_{i+1}).
  // Mass on [1, a_{N+2}) sells only through the atom at 1, with probability q.
  for (std::size_t i = 0; i <= n; ++i) {
    const double inv = 1.0 / a[i];
    double* row = m.row(i);
    for (std::size_t j = 0; j <= i; ++j) row[j] = a[j + 1] * inv;
    for (std::size_t j = i + 1; j <= n; ++j) row[j] = curves.left_revenue(a[i + 1], a[j]) * inv;
    row[n + 1] = curves.q_left * inv;
  }
  if (!curves.has_right) return m;

  std::vector<double> revenue(k);
  for (std::size_t j = 0; j < k; ++j) revenue[j] = curves.right_revenue(a[j]);
  std::size_t r = n + 1;
  if (!grid.collapsed) {
    for (std::size_t i = n + 1; i <= 2 * n; ++i, ++r) {
      const double inv = 1.0 / revenue[i];
      double* row = m.row(r);
      for (std::size_t j = 0; j + 1 <= i; ++j) row[j] = revenue[j + 1] * inv;
    }
  }
  const std::size_t top = k - 1;
  const double inv = 1.0 / revenue[top];
  double* row = m.row(r);
  for (std::size_t j = 0; j < top; ++j) row[j] = revenue[j + 1] * inv;
  row[top] = curves.tail_revenue * inv;
  return m;
}

linprog::LpModel maximin_model(const DenseMatrix& payoff) {
  const std::size_t rows = payoff.rows();
  const std::size_t k = payoff.cols();
  linprog::LpModel model;
  model.objective.assign(k + 1, 0.0);
  model.objective[k] = 1.0;
  model.constraints = DenseMatrix(rows + 1, k + 1);
  model.rhs.assign(rows + 1, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < k; ++j) model.constraints(i, j) = -payoff(i, j);
    model.constraints(i, k) = 1.0;
  }
  for (std::size_t j = 0; j < k; ++j) model.constraints(rows, j) = 1.0;
  model.rhs[rows] = 1.0;
  return model;
}

linprog::LpModel lower_lp_model(const PricingContext& ctx, const PriceGrid& grid) {
  return maximin_model(lower_payoff(ctx, grid));
}

linprog::LpModel upper_lp_model(const PricingContext& ctx, const PriceGrid& grid) {
  return maximin_model(upper_payoff(ctx, grid));
}

MaximinSolution solve_maximin(const DenseMatrix& payoff, const linprog::Solver& solver,
                              const linprog::Basis* start) {
  const std::size_t rows = payoff.rows();
  const std::size_t k = payoff.cols();
  if (rows == 0) throw std::invalid_argument("solve_maximin: payoff has no rows");
  MaximinSolution out;
  out.p.assign(k, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = payoff.row(i);
    if (std::any_of(row, row + k, [](double v) { return v < 0.0; })) {
      throw std::invalid_argument("solve_maximin: payoff must be nonnegative");
    }
    // A row nature can always pick with zero payoff pins the value at 0.
    if (std::none_of(row, row + k, [](double v) { return v > 0.0; })) return out;
  }

  linprog::LpModel model;
  model.objective.assign(rows, 1.0);
  model.rhs.assign(k, 1.0);
  model.constraints = DenseMatrix(k, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = payoff.row(i);
    for (std::size_t j = 0; j < k; ++j) model.constraints(j, i) = row[j];
  }
  linprog::LpSolution sol = start ? solver.solve(model, *start) : solver.solve(model);
  // A warm start that went numerically astray gets one cold retry.
  if (start && !(sol.status == linprog::Status::Optimal && sol.objective_value > 0.0 &&
                 std::isfinite(sol.objective_value))) {
    sol = solver.solve(model);
  }
  if (sol.status != linprog::Status::Optimal) {
    throw std::runtime_error(std::string("solve_maximin: solver returned ") + linprog::to_string(sol.status));
  }
  out.iterations = sol.iterations;
  out.basis = sol.basis;
  out.warm_start_used = start != nullptr && sol.warm_start_used;

  double y_total = 0.0;
  for (double v : sol.primal) y_total += v;
  double worst_column = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += model.constraints(j, i) * sol.primal[i];
    worst_column = std::max(worst_column, s);
  }
  out.bound = std::max(1.0, worst_column) / y_total;

  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out.p[j] = sol.dual[j] / sol.objective_value;
    total += out.p[j];
  }
  if (total > 1.0) {
    for (double& v : out.p) v /= total;
  }
  double value = kInf;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = payoff.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += row[j] * out.p[j];
    value = std::min(value, s);
  }
  out.value = value;
  return out;
}

namespace {

// Grids at or above this size are solved after a half-size grid whose optimal
// basis, refined, seeds the simplex.
constexpr int kWarmStartMinN = 1000;

// The upper program's optimal basis can grow well past twice the half-size
// one (regular q = 0.25 goes from 879 at N = 1250 to 4137 at N = 2500). When
// the refined basis is below this fraction of the lower program's basis, the
// latter seeds the solve instead; it is usually the closer of the two.
constexpr double kHintRatio = 0.6;

// Index of a coarse grid point (or payoff row) on the grid twice as fine.
// Both grids and both payoffs lay out a lower block 0..N, an upper block, and
// possibly one tail row, and every coarse point coincides with a fine one.
std::size_t refine_index(std::size_t i, std::size_t coarse_n, std::size_t coarse_size, std::size_t fine_size,
                         bool has_tail) {
  if (i <= coarse_n) return 2 * i;
  if (has_tail && i + 1 == coarse_size) return fine_size - 1;
  return 2 * coarse_n + 1 + 2 * (i - coarse_n - 1);
}

// Maps a set of coarse indices to the fine grid, filling the midpoint
// between neighbours that are both in the set.
std::vector<std::size_t> refine_set(std::vector<std::size_t> coarse, std::size_t coarse_n, std::size_t coarse_size,
                                    std::size_t fine_size, bool has_tail, std::vector<std::size_t>& extras) {
  std::sort(coarse.begin(), coarse.end());
  std::vector<std::size_t> fine;
  for (std::size_t t = 0; t < coarse.size(); ++t) {
    const std::size_t f = refine_index(coarse[t], coarse_n, coarse_size, fine_size, has_tail);
    fine.push_back(f);
    if (t + 1 < coarse.size()) {
      const std::size_t g = refine_index(coarse[t + 1], coarse_n, coarse_size, fine_size, has_tail);
      if (g == f + 2) extras.push_back(f + 1);
    }
  }
  return fine;
}

// Fine basis from a coarse one: refined columns and rows, trimmed to equal
// length by dropping midpoint fills from the longer side.
linprog::Basis refine_basis(const linprog::Basis& coarse, std::size_t coarse_n, std::size_t coarse_rows,
                            std::size_t coarse_cols, std::size_t fine_rows, std::size_t fine_cols, bool has_tail) {
  // Program columns are payoff rows; program rows are grid points.
  std::vector<std::size_t> col_extra;
  std::vector<std::size_t> row_extra;
  auto cols = refine_set(coarse.columns, coarse_n, coarse_cols, fine_cols, has_tail, col_extra);
  auto rows = refine_set(coarse.rows, coarse_n, coarse_rows, fine_rows, false, row_extra);
  const std::size_t target = std::min(cols.size() + col_extra.size(), rows.size() + row_extra.size());
  auto fill = [target](std::vector<std::size_t>& v, const std::vector<std::size_t>& extra) {
    if (v.size() > target) v.resize(target);
    for (std::size_t t = 0; v.size() < target && t < extra.size(); ++t) v.push_back(extra[t]);
  };
  fill(cols, col_extra);
  fill(rows, row_extra);
  return {std::move(cols), std::move(rows)};
}

using PayoffBuilder = DenseMatrix (*)(const PricingContext&, const PriceGrid&);

MaximinSolution solve_on_grid(PayoffBuilder build, const PricingContext& ctx, const PriceGrid& grid,
                              const linprog::Solver& solver, const linprog::Basis* hint = nullptr) {
  const DenseMatrix payoff = build(ctx, grid);
  if (grid.n < kWarmStartMinN || grid.n % 2 != 0) return solve_maximin(payoff, solver);

  const PriceGrid coarse_grid = build_grid(ctx, grid.n / 2, grid.eta, grid.b);
  if (coarse_grid.collapsed != grid.collapsed) return solve_maximin(payoff, solver);
  const DenseMatrix coarse_payoff = build(ctx, coarse_grid);
  const MaximinSolution coarse = solve_on_grid(build, ctx, coarse_grid, solver);
  const bool has_tail = payoff.rows() > static_cast<std::size_t>(grid.n) + 1;
  const linprog::Basis start =
      refine_basis(coarse.basis, static_cast<std::size_t>(coarse_grid.n), coarse_payoff.cols(), coarse_payoff.rows(),
                   payoff.cols(), payoff.rows(), has_tail);
  if (hint && static_cast<double>(start.columns.size()) < kHintRatio * static_cast<double>(hint->columns.size())) {
    return solve_maximin(payoff, solver, hint);
  }
  return solve_maximin(payoff, solver, &start);
}

// The lower basis on the upper program: payoff rows keep their index except
// the lower program's tail row, which maps to the upper program's. With a
// full right block the upper payoff has one more row than the lower one.
linprog::Basis lower_to_upper(const linprog::Basis& lower, const PriceGrid& grid) {
  const std::size_t n = static_cast<std::size_t>(grid.n);
  const bool has_right = grid.r_high > 1.0;
  linprog::Basis out = lower;
  if (!has_right || grid.collapsed) return out;
  const std::size_t lower_rows = 2 * n + 1;
  for (std::size_t& c : out.columns) {
    if (c + 1 == lower_rows) c = lower_rows;
  }
  return out;
}

}  // namespace

LowerBound lower_lp(const PricingContext& ctx, const PriceGrid& grid, const linprog::Solver& solver) {
  const MaximinSolution sol = solve_on_grid(&lower_payoff, ctx, grid, solver);
  std::vector<double> atoms;
  std::vector<double> probs;
  for (std::size_t j = 0; j < sol.p.size(); ++j) {
    if (sol.p[j] > 0.0) {
      atoms.push_back(grid.points[j] * ctx.w());
      probs.push_back(sol.p[j]);
    }
  }
  return {sol.value, Mechanism(std::move(atoms), std::move(probs)), sol.iterations, sol.basis};
}

double upper_lp(const PricingContext& ctx, const PriceGrid& grid, const linprog::Solver& solver,
                const linprog::Basis* lower_basis) {
  if (!lower_basis || lower_basis->columns.empty()) return solve_on_grid(&upper_payoff, ctx, grid, solver).bound;
  const linprog::Basis hint = lower_to_upper(*lower_basis, grid);
  return solve_on_grid(&upper_payoff, ctx, grid, solver, &hint).bound;
}

LpBounds solve_bounds(const PricingContext& ctx, const LpOptions& options) {
  LpBounds out;
  out.grid = build_grid(ctx, options);
  const LowerBound lower = lower_lp(ctx, out.grid);
  out.lower = lower.value;
  out.mechanism = lower.mechanism;
  out.upper = upper_lp(ctx, out.grid, linprog::RevisedSimplex{}, &lower.basis);
  return out;
}

LpBounds interval_lp(const PricingContext& ctx, const LpOptions& options) {
  if (!(ctx.q_min() < ctx.q_max())) throw DomainError("interval_lp: requires q_min < q_max");
  return solve_bounds(ctx, options);
}

std::pair<double, double> ci_interval(double q_hat, long long samples) {
  if (!(q_hat > 0.0 && q_hat < 1.0)) throw DomainError("ci_interval: q_hat must lie in (0,1)");
  if (samples < 1) throw DomainError("ci_interval: samples must be positive");
  const double half = 1.96 * std::sqrt(q_hat * (1.0 - q_hat) / static_cast<double>(samples));
  const double lo = q_hat - half;
  const double hi = q_hat + half;
  if (!(lo > 0.0 && hi < 1.0)) throw DomainError("ci_interval: interval reaches 0 or 1");
  return {lo, hi};
}

}  // namespace robustprice
