#pragma once

// Discrete randomized posted-price mechanisms and the nature oracle that
// computes their worst-case ratio over the reduced family.

#include <span>
#include <vector>

#include "robustprice/worstcase.hpp"

namespace robustprice {

/// A distribution over posted prices. Atoms are strictly increasing and
/// positive; probabilities may sum to less than one (the missing mass never
/// sells).
class Mechanism {
 public:
  Mechanism() = default;
  Mechanism(std::vector<double> atoms, std::vector<double> probs);

  static Mechanism deterministic(double price);

  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total_mass() const;

  /// Same probabilities with every atom multiplied by `factor`.
  Mechanism scaled(double factor) const;
  /// Drops atoms whose probability is at most `threshold`.
  Mechanism pruned(double threshold = 0.0) const;

 private:
  std::vector<double> atoms_;
  std::vector<double> probs_;
};

/// Expected revenue of the mechanism under d divided by d's oracle revenue.
double revenue_ratio(const Mechanism& m, const WorstCaseDistribution& d);

struct EvaluationReport {
  double ratio;
  /// Oracle price of the worst member. When the infimum is a left limit at an
  /// atom, this is the atom itself.
  double argmin_r;
  Side side;
  /// Upper bound on how much the ratio could still drop beyond r_cap when the
  /// right family is unbounded and a finite cap was used; 0 otherwise.
  double truncation_slack;
};

struct NatureOptions {
  /// Cap on right-side oracle prices when r_h is infinite. +inf evaluates the
  /// limit analytically. Non-positive selects the default 1e4 * w.
  double r_cap = 0.0;
  /// Target accuracy of the left-side search, relative to w.
  double tol = 1e-10;
  /// Scan points per inter-atom segment before golden-section refinement.
  int scan_points = 64;
};

/// Exact inner minimization over the reduced family. For interval contexts
/// the left family uses q_min and the right family uses q_max.
EvaluationReport nature_worst_case(const Mechanism& m, const PricingContext& ctx,
                                   const NatureOptions& options = {});

/// Discretized log-uniform price density on [q w, w]: grid_n segments of
/// equal logarithmic width, each collapsed to an atom at its conditional mean.
Mechanism log_uniform_mechanism(const PricingContext& ctx, int grid_n);

/// Atom of mass a at w plus a tail density proportional to the logarithmic
/// derivative of the right-side revenue curve, discretized on grid_n
/// segments of equal mass. Regular class, q > 1/2 only.
Mechanism tail_weighted_mechanism(const PricingContext& ctx, double a, int grid_n);

/// The atom weight used with tail_weighted_mechanism in the q -> 1 analysis.
double tail_weighted_default_a(double q);

}  // namespace robustprice
