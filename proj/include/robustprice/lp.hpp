#pragma once

// Factor-revealing linear programs over a finite price grid. The lower
// program yields a feasible randomized mechanism and a certified guarantee;
// the upper program bounds what any mechanism can guarantee.

#include <cstddef>
#include <utility>
#include <vector>

#include "robustprice/linprog.hpp"
#include "robustprice/mechanism.hpp"

namespace robustprice {

struct LpOptions {
  int n = 2500;
  double eta = 1e-5;
  double b = 250.0;
};

/// Grid normalized to w = 1. The lower block a_0..a_N runs linearly from r_l
/// (at q_min) to 1 - eta; the upper block a_{N+1}..a_{2N+1} runs linearly from
/// 1 to min(b, r_h) (at q_max). When r_h <= 1 + eta the upper block is the
/// single point 1.
struct PriceGrid {
  std::vector<double> points;
  int n = 0;
  double eta = 0.0;
  double b = 0.0;
  /// Index of the point equal to 1.
  std::size_t split_index = 0;
  bool collapsed = false;
  double max_gap = 0.0;
  /// Normalized r_h at q_max; +inf for alpha = 0.
  double r_high = 0.0;
};

PriceGrid build_grid(const PricingContext& ctx, int n, double eta, double b);
PriceGrid build_grid(const PricingContext& ctx, const LpOptions& options = {});

/// Payoff rows of a program: entry (i, j) is the guaranteed ratio contributed
/// by unit mass on grid point j against nature's i-th constraint.
linprog::DenseMatrix lower_payoff(const PricingContext& ctx, const PriceGrid& grid);
linprog::DenseMatrix upper_payoff(const PricingContext& ctx, const PriceGrid& grid);

/// The program in its textbook form: variables (p_0..p_{K-1}, c), maximize c
/// subject to c <= (M p)_i for every payoff row and sum p <= 1.
linprog::LpModel maximin_model(const linprog::DenseMatrix& payoff);
linprog::LpModel lower_lp_model(const PricingContext& ctx, const PriceGrid& grid);
linprog::LpModel upper_lp_model(const PricingContext& ctx, const PriceGrid& grid);

struct MaximinSolution {
  /// min_i (M p)_i for the returned p: a certified lower bound on the game value.
  double value = 0.0;
  /// max(1, max_j (M^T y)_j) / 1^T y for the solver's y, which scaled down is
  /// feasible for the program above: a certified upper bound on the game value.
  double bound = 0.0;
  std::vector<double> p;
  linprog::Basis basis;
  std::size_t iterations = 0;
  /// True when the solve ran from the supplied start basis.
  bool warm_start_used = false;
};

/// Solves max_p min_i (M p)_i over sum p <= 1 through the equivalent program
/// max 1^T y s.t. M^T y <= 1, y >= 0, whose duals are p / value. Requires a
/// nonnegative payoff. An optional basis of that program warm-starts the solve.
MaximinSolution solve_maximin(const linprog::DenseMatrix& payoff, const linprog::Solver& solver,
                              const linprog::Basis* start = nullptr);

struct LowerBound {
  double value = 0.0;
  /// Grid points scaled by w with the LP probabilities; zero masses dropped.
  Mechanism mechanism;
  std::size_t iterations = 0;
  /// Optimal basis of the game-form program.
  linprog::Basis basis;
};

LowerBound lower_lp(const PricingContext& ctx, const PriceGrid& grid,
                    const linprog::Solver& solver = linprog::RevisedSimplex{});

/// `lower_basis`, the lower program's optimal basis on the same grid, is an
/// alternative warm start for fine grids whose half-size basis is much
/// smaller than it.
double upper_lp(const PricingContext& ctx, const PriceGrid& grid,
                const linprog::Solver& solver = linprog::RevisedSimplex{},
                const linprog::Basis* lower_basis = nullptr);

struct LpBounds {
  double lower = 0.0;
  double upper = 0.0;
  Mechanism mechanism;
  PriceGrid grid;
};

/// Lower and upper programs on the same grid. Works for point and interval
/// contexts.
LpBounds solve_bounds(const PricingContext& ctx, const LpOptions& options = {});

/// solve_bounds restricted to interval contexts with q_min < q_max.
LpBounds interval_lp(const PricingContext& ctx, const LpOptions& options = {});

/// q_hat -/+ 1.96 sqrt(q_hat (1 - q_hat) / samples); throws DomainError when
/// the interval reaches 0 or 1.
std::pair<double, double> ci_interval(double q_hat, long long samples);

}  // namespace robustprice
