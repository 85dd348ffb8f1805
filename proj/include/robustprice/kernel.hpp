#pragma once

// Special functions shared by every pricing module: the generalized Pareto
// survival map, its inverse, the two-point interpolation kernel, Lambert W,
// and the reserve-price interval of the worst-case family.

#include <limits>
#include <stdexcept>
#include <utility>

namespace robustprice {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Above this threshold the exponential branch of the generalized Pareto map
/// is used. The two closed forms differ by less than 1e-8 there, so the
/// function stays continuous in alpha even though the formula switches.
inline constexpr double kAlphaExpThreshold = 1.0 - 1e-9;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Strong type for the class parameter: 0 is regular, 1 is mhr.
class Alpha {
 public:
  explicit Alpha(double value);
  double value() const { return value_; }
  bool is_exponential() const { return value_ > kAlphaExpThreshold; }

 private:
  double value_;
};

/// A (price, survival) pair the kernel interpolates through.
struct AnchorPoint {
  double price;
  double survival;
};

// Generalized Pareto survival map. gamma(a, +inf) == 0.
double gamma(Alpha alpha, double v);

// Inverse of gamma on (0,1]; gamma_inv(a, 0) == +inf.
double gamma_inv(Alpha alpha, double y);

/// Two-point kernel: the generalized Pareto tail through `lo` and `hi`,
/// evaluated at v >= lo.price. At v == lo.price it returns lo.survival.
double hbar(Alpha alpha, AnchorPoint lo, AnchorPoint hi, double v);

/// Principal branch of Lambert W on [0, inf).
double lambert_w(double x);

struct ReserveBounds {
  double low;
  double high;  // +inf when alpha == 0
};

/// Smallest and largest oracle price of the worst-case family for (w, q).
/// `high` is the closed form w / (alpha * gamma_inv(q)); for mhr-like classes
/// with small q it can fall below w, in which case no member has its oracle
/// price above w.
ReserveBounds reserve_bounds(Alpha alpha, double w, double q);

/// The constant alpha-virtual value of the kernel through `lo` and `hi`.
double virtual_value_const(Alpha alpha, AnchorPoint lo, AnchorPoint hi);

/// Maximizer of v -> v * gamma(alpha, beta * (v - w)) over v >= w.
double gamma_revenue_argmax(Alpha alpha, double beta, double w);

}  // namespace robustprice
