#pragma once

// The one-parameter family of worst-case value distributions that nature
// reduces to once the seller has observed a conversion rate at one price.

#include <string_view>
#include <vector>

#include "robustprice/kernel.hpp"

namespace robustprice {

/// Raised when the observed information admits no positive guarantee: a
/// conversion rate of exactly 0 or 1, or the unrestricted distribution class.
class DegenerateInformation : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Maps a class name ("regular", "mhr", or a number in [0,1]) to its alpha.
/// "general" is rejected with DegenerateInformation.
Alpha alpha_for_class(std::string_view name);

/// Problem instance: class, incumbent price w, and the conversion-rate
/// information at w (a point or an interval).
class PricingContext {
 public:
  static PricingContext point(Alpha alpha, double w, double q);
  static PricingContext interval(Alpha alpha, double w, double q_min, double q_max);

  Alpha alpha() const { return alpha_; }
  double w() const { return w_; }
  bool is_point() const { return q_min_ == q_max_; }
  /// Point rate; throws for interval contexts.
  double q() const;
  double q_min() const { return q_min_; }
  double q_max() const { return q_max_; }

  /// Lowest oracle price: r_l at q_min.
  double r_low() const;
  /// Highest oracle price: r_h at q_max (may be +inf).
  double r_high() const;

  /// Point context at rate q inside this context's interval.
  PricingContext at(double q) const;

 private:
  PricingContext(Alpha alpha, double w, double q_min, double q_max)
      : alpha_(alpha), w_(w), q_min_(q_min), q_max_(q_max) {}

  Alpha alpha_;
  double w_;
  double q_min_;
  double q_max_;
};

enum class Side { Left, Right };

const char* to_string(Side side);

/// Member F_{alpha,r,w,q} of the reduced family. Left members (r <= w) start
/// at r, follow the kernel through (r,1) and (w,q), and carry an atom of size
/// q at w. Right members (r > w) follow the kernel through (0,1) and (w,q) up
/// to r, where the remaining mass sits.
class WorstCaseDistribution {
 public:
  /// Requires a point-rate context and r in [r_l, w] or (w, r_h].
  WorstCaseDistribution(const PricingContext& ctx, double r);

  const PricingContext& context() const { return ctx_; }
  double r() const { return r_; }
  Side side() const { return side_; }

  /// Probability of sale at price v, i.e. P(value >= v). The atom at the top
  /// of the support is included, so posting exactly w sells with probability q.
  double survival(double v) const;

  /// opt(F) = r * survival(r); equals r for Left members.
  double oracle_revenue() const;

 private:
  PricingContext ctx_;
  double r_;
  Side side_;
};

/// n Left members evenly spaced on [r_l, w] and up to n Right members
/// geometrically spaced on (w, min(r_h, r_cap)]. r_cap must exceed w.
std::vector<WorstCaseDistribution> family_grid(const PricingContext& ctx, int n, double r_cap);

}  // namespace robustprice
