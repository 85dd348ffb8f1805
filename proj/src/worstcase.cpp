#include "robustprice/worstcase.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace robustprice {

namespace {

constexpr const char* kDegenerateMessage =
    "no pricing mechanism can guarantee a positive fraction of the oracle revenue "
    "when the conversion rate is 0 or 1";

void check_rate(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("conversion rate must lie in (0,1)");
  if (q == 0.0 || q == 1.0) throw DegenerateInformation(kDegenerateMessage);
}

}  // namespace

Alpha alpha_for_class(std::string_view name) {
  if (name == "regular") return Alpha(0.0);
  if (name == "mhr") return Alpha(1.0);
  if (name == "general") {
    throw DegenerateInformation(
        "no pricing mechanism can guarantee a positive fraction of the oracle revenue "
        "against the general class of distributions");
  }
  double value = 0.0;
  const auto* end = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(name.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DomainError("unknown distribution class '" + std::string(name) + "'");
  }
  return Alpha(value);
}

PricingContext PricingContext::point(Alpha alpha, double w, double q) {
  if (!(w > 0.0) || std::isinf(w)) throw DomainError("incumbent price w must be positive");
  check_rate(q);
  return PricingContext(alpha, w, q, q);
}

PricingContext PricingContext::interval(Alpha alpha, double w, double q_min, double q_max) {
  if (!(w > 0.0) || std::isinf(w)) throw DomainError("incumbent price w must be positive");
  check_rate(q_min);
  check_rate(q_max);
  if (!(q_min <= q_max)) throw DomainError("interval requires q_min <= q_max");
  return PricingContext(alpha, w, q_min, q_max);
}

double PricingContext::q() const {
  if (!is_point()) throw DomainError("context carries an interval, not a point rate");
  return q_min_;
}

double PricingContext::r_low() const { return reserve_bounds(alpha_, w_, q_min_).low; }

double PricingContext::r_high() const { return reserve_bounds(alpha_, w_, q_max_).high; }

PricingContext PricingContext::at(double q) const {
  if (q < q_min_ || q > q_max_) throw DomainError("rate outside the context's interval");
  return PricingContext(alpha_, w_, q, q);
}

const char* to_string(Side side) { return side == Side::Left ? "left" : "right"; }

WorstCaseDistribution::WorstCaseDistribution(const PricingContext& ctx, double r)
    : ctx_(ctx), r_(r), side_(r <= ctx.w() ? Side::Left : Side::Right) {
  const double q = ctx_.q();
  const auto bounds = reserve_bounds(ctx_.alpha(), ctx_.w(), q);
  const double slack = 1e-12 * ctx_.w();
  if (side_ == Side::Left) {
    if (!(r >= bounds.low - slack)) throw DomainError("oracle price below r_l");
  } else if (!(r <= bounds.high + slack * std::max(1.0, r / ctx_.w()))) {
    throw DomainError("oracle price above r_h");
  }
  if (std::isinf(r)) throw DomainError("oracle price must be finite");
}

double WorstCaseDistribution::survival(double v) const {
  if (v < 0.0) throw DomainError("survival: price must be nonnegative");
  const double w = ctx_.w();
  const double q = ctx_.q();
  if (side_ == Side::Left) {
    if (v > w) return 0.0;
    if (v == w) return q;
    if (v <= r_) return 1.0;
    return hbar(ctx_.alpha(), {r_, 1.0}, {w, q}, v);
  }
  if (v > r_) return 0.0;
  return hbar(ctx_.alpha(), {0.0, 1.0}, {w, q}, v);
}

double WorstCaseDistribution::oracle_revenue() const {
  if (side_ == Side::Left) return r_;
  return r_ * hbar(ctx_.alpha(), {0.0, 1.0}, {ctx_.w(), ctx_.q()}, r_);
}

std::vector<WorstCaseDistribution> family_grid(const PricingContext& ctx, int n, double r_cap) {
  if (n < 2) throw DomainError("family_grid: n must be at least 2");
  const double w = ctx.w();
  if (!(r_cap > w)) throw DomainError("family_grid: r_cap must exceed w");
  const PricingContext point = ctx.at(ctx.q());
  const double r_low = point.r_low();
  std::vector<WorstCaseDistribution> out;
  out.reserve(2 * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double r = k + 1 == n ? w : r_low + (w - r_low) * k / (n - 1);
    out.emplace_back(point, r);
  }
  const double top = std::min(point.r_high(), r_cap);
  if (top > w) {
    for (int k = 1; k <= n; ++k) {
      const double r = k == n ? top : w * std::pow(top / w, static_cast<double>(k) / n);
      out.emplace_back(point, r);
    }
  }
  return out;
}

}  // namespace robustprice
