#include "robustprice/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace robustprice {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw DomainError(what);
}

}  // namespace

Alpha::Alpha(double value) : value_(value) {
  require(value >= 0.0 && value <= 1.0, "alpha must lie in [0,1]");
}

double gamma(Alpha alpha, double v) {
  require(v >= 0.0, "gamma: argument must be nonnegative");
  if (std::isinf(v)) return 0.0;
  if (alpha.is_exponential()) return std::exp(-v);
  const double s = 1.0 - alpha.value();
  // (1 + s v)^(-1/s), written through log1p for accuracy at small s*v.
  return std::exp(-std::log1p(s * v) / s);
}

double gamma_inv(Alpha alpha, double y) {
  require(y >= 0.0 && y <= 1.0, "gamma_inv: argument must lie in [0,1]");
  if (y == 0.0) return kInf;
  if (alpha.is_exponential()) return -std::log(y);
  const double s = 1.0 - alpha.value();
  // (y^(-s) - 1) / s
  return std::expm1(-s * std::log(y)) / s;
}

double hbar(Alpha alpha, AnchorPoint lo, AnchorPoint hi, double v) {
  require(lo.price < hi.price, "hbar: anchors must have increasing prices");
  require(lo.survival > 0.0 && lo.survival <= 1.0, "hbar: lo.survival must lie in (0,1]");
  require(hi.survival >= 0.0 && hi.survival <= lo.survival,
          "hbar: hi.survival must not exceed lo.survival");
  require(v >= lo.price, "hbar: v must be at least lo.price");
  if (v == lo.price) return lo.survival;
  if (std::isinf(v)) return 0.0;
  const double scale = gamma_inv(alpha, hi.survival / lo.survival);
  if (std::isinf(scale)) return 0.0;
  return lo.survival * gamma(alpha, scale * (v - lo.price) / (hi.price - lo.price));
}

double lambert_w(double x) {
  require(x >= 0.0, "lambert_w: argument must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return kInf;
  double w = std::log1p(x);
  for (int iter = 0; iter < 50; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    // Halley step.
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) break;
  }
  return w;
}

ReserveBounds reserve_bounds(Alpha alpha, double w, double q) {
  require(w > 0.0, "reserve_bounds: w must be positive");
  require(q > 0.0 && q < 1.0, "reserve_bounds: q must lie in (0,1)");
  const double g = gamma_inv(alpha, q);
  const double low = w / (g + 1.0);
  const double high = alpha.value() == 0.0 ? kInf : w / (alpha.value() * g);
  return {low, high};
}

double virtual_value_const(Alpha alpha, AnchorPoint lo, AnchorPoint hi) {
  require(lo.price < hi.price, "virtual_value_const: anchors must have increasing prices");
  require(lo.survival > 0.0 && lo.survival <= 1.0 && hi.survival > 0.0 &&
              hi.survival < lo.survival,
          "virtual_value_const: need 0 < hi.survival < lo.survival <= 1");
  const double s = alpha.is_exponential() ? 0.0 : 1.0 - alpha.value();
  return s * lo.price - (hi.price - lo.price) / gamma_inv(alpha, hi.survival / lo.survival);
}

double gamma_revenue_argmax(Alpha alpha, double beta, double w) {
  require(beta > 0.0, "gamma_revenue_argmax: beta must be positive");
  require(w >= 0.0, "gamma_revenue_argmax: w must be nonnegative");
  const double a = alpha.value();
  if (alpha.is_exponential()) return 1.0 / beta;
  const double s = 1.0 - a;
  const double left_end = w - 1.0 / (s * beta);
  const double numer = 1.0 - s * beta * w;
  if (a == 0.0) {
    // v / (1 + beta (v - w)) increases without bound in v when beta w < 1.
    return numer > 0.0 ? kInf : left_end;
  }
  return std::max(numer / (beta * a), left_end);
}

}  // namespace robustprice
