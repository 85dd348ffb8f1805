#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "robustprice/deterministic.hpp"
#include "robustprice/mechanism.hpp"

using namespace robustprice;

namespace {

const double kQHat = 0.528482028408265511;  // mpmath root of W(1/log(1/q)) W(e/q) = 1
const double kMhrKink = std::exp(-std::exp(-1.0));

NatureOptions exact() {
  NatureOptions o;
  o.r_cap = kInf;
  return o;
}

}  // namespace

TEST_CASE("regular closed form against independent evaluation") {
  // mpmath evaluation of the three regimes.
  struct Cell {
    double q, price, ratio;
    Regime regime;
  };
  for (const Cell c : {Cell{0.01, 0.18181818181818182, 0.18181818181818182, Regime::LowQ},
                       Cell{0.1, 0.4805061467040843, 0.4805061467040843, Regime::LowQ},
                       Cell{0.4, 0.93333333333333333, 0.58333333333333333, Regime::MidQ},
                       Cell{0.6, 1.0, 0.4, Regime::HighQ}, Cell{0.9, 1.0, 0.1, Regime::HighQ}}) {
    const auto s = solve_regular(1.0, c.q);
    CHECK(s.price == doctest::Approx(c.price).epsilon(1e-13));
    CHECK(s.ratio == doctest::Approx(c.ratio).epsilon(1e-13));
    CHECK(s.regime == c.regime);
    CHECK(s.method == SolveMethod::ClosedForm);
  }
}

TEST_CASE("mhr closed form against independent evaluation") {
  struct Cell {
    double q, price, ratio;
    Regime regime;
  };
  for (const Cell c : {Cell{0.01, 0.47551907504865777, 0.47551907504865777, Regime::LowQ},
                       Cell{0.1, 0.63843707888410279, 0.63843707888410279, Regime::LowQ},
                       Cell{0.25, 0.74399915315420595, 0.74399915315420595, Regime::LowQ},
                       Cell{0.5, 0.85257223886908946, 0.85257223886908946, Regime::LowQ},
                       Cell{0.6, 0.94258321712744417, 0.80867859999836106, Regime::MidQ},
                       Cell{0.75, 1.0, 0.58650071243933594, Regime::HighQ},
                       Cell{0.9, 1.0, 0.25775961763476955, Regime::HighQ}}) {
    const auto s = solve_mhr(1.0, c.q);
    CHECK(s.price == doctest::Approx(c.price).epsilon(1e-12));
    CHECK(s.ratio == doctest::Approx(c.ratio).epsilon(1e-12));
    CHECK(s.regime == c.regime);
  }
  CHECK(mhr_q_hat() == doctest::Approx(kQHat).epsilon(1e-12));
  CHECK(mhr_q_hat() >= 0.52);
  CHECK(mhr_q_hat() <= 0.53);
}

TEST_CASE("reference deterministic cells") {
  const double qs[] = {0.01, 0.25, 0.5, 0.75};
  const double regular[] = {18.18, 66.62, 50.00, 25.00};
  const double mhr[] = {47.55, 74.35, 85.23, 58.65};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(100.0 * solve_regular(1.0, qs[i]).ratio - regular[i]) <= 0.2);
    CHECK(std::abs(100.0 * solve_mhr(1.0, qs[i]).ratio - mhr[i]) <= 0.2);
  }
  CHECK(solve_regular(1.0, 0.75).price == 1.0);
}

TEST_CASE("ratio is continuous across regime thresholds") {
  auto regular = [](double q) { return solve_regular(1.0, q).ratio; };
  auto mhr = [](double q) { return solve_mhr(1.0, q).ratio; };
  for (double t : {0.25, 0.5}) CHECK(std::abs(regular(t * (1 - 1e-12)) - regular(t * (1 + 1e-12))) <= 1e-9);
  for (double t : {kQHat, kMhrKink}) CHECK(std::abs(mhr(t * (1 - 1e-12)) - mhr(t * (1 + 1e-12))) <= 1e-9);
  // Both middle and high formulas give 1/2 at q = 1/2.
  CHECK(regular(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  // Thresholds take the lower regime.
  CHECK(solve_regular(1.0, 0.25).regime == Regime::LowQ);
  CHECK(solve_regular(1.0, 0.5).regime == Regime::MidQ);
}

TEST_CASE("degenerate rates are rejected") {
  for (double q : {0.0, 1.0}) {
    CHECK_THROWS_AS(solve_regular(1.0, q), DomainError);
    CHECK_THROWS_AS(solve_mhr(1.0, q), DomainError);
  }
}

TEST_CASE("scale equivariance") {
  for (double q : {0.1, 0.4, 0.6, 0.8}) {
    for (double a : {0.0, 0.5, 1.0}) {
      const auto base = solve_deterministic(PricingContext::point(Alpha(a), 1.0, q));
      for (double w : {0.1, 37.0}) {
        const auto s = solve_deterministic(PricingContext::point(Alpha(a), w, q));
        CHECK(s.price == doctest::Approx(w * base.price).epsilon(1e-9));
        CHECK(s.ratio == doctest::Approx(base.ratio).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("search agrees with closed forms") {
  for (int k = 1; k <= 19; ++k) {
    const double q = 0.05 * k;
    const auto reg = solve_general(PricingContext::point(Alpha(0.0), 1.0, q));
    const auto mhr = solve_general(PricingContext::point(Alpha(1.0), 1.0, q));
    CHECK(reg.method == SolveMethod::Search);
    CHECK(std::abs(reg.ratio - solve_regular(1.0, q).ratio) <= 1e-3);
    CHECK(std::abs(mhr.ratio - solve_mhr(1.0, q).ratio) <= 1e-3);
  }
  CHECK(solve_general(PricingContext::point(Alpha(0.0), 1.0, 0.5)).ratio == doctest::Approx(0.5).epsilon(1e-6));
  // Reference value at mhr q = 0.25: 74.35%.
  CHECK(std::abs(solve_general(PricingContext::point(Alpha(1.0), 1.0, 0.25)).ratio - 0.7435) <= 0.002);
  CHECK_THROWS_AS(solve_general(PricingContext::point(Alpha(0.5), 1.0, 0.5), 0.0), DomainError);
}

TEST_CASE("ratio grows with alpha") {
  for (double q : {0.05, 0.3, 0.5, 0.8}) {
    double prev = 0.0;
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double r = solve_general(PricingContext::point(Alpha(a), 1.0, q)).ratio;
      CHECK(r >= prev - 1e-9);
      prev = r;
    }
  }
  const double mid = solve_deterministic(PricingContext::point(Alpha(0.5), 1.0, 0.5)).ratio;
  CHECK(mid > 0.5);
  CHECK(mid < solve_mhr(1.0, 0.5).ratio);
}

TEST_CASE("mu") {
  for (double a : {0.0, 0.3, 1.0}) CHECK(mu(Alpha(a), 0.4, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double q : {0.2, 0.5, 0.8}) {
    const double r_low = reserve_bounds(Alpha(0.0), 1.0, q).low;
    for (double p : {r_low, 0.5 * (r_low + 1.0), 0.99}) {
      CHECK(mu(Alpha(0.0), q, p) == doctest::Approx(1.0 - std::sqrt((1.0 - p) * (1.0 - q))).epsilon(1e-12));
    }
  }
  for (double a : {0.25, 0.5, 1.0}) {
    const double q = std::exp(-1.0);
    const double r_low = reserve_bounds(Alpha(a), 1.0, q).low;
    for (int k = 0; k <= 20; ++k) {
      const double p = r_low + (1.0 - r_low) * k / 20.0;
      const double m = mu(Alpha(a), q, p);
      CHECK(m >= r_low - 1e-12);
      CHECK(m <= p + 1e-12);
    }
  }
  CHECK_THROWS_AS(mu(Alpha(0.0), 0.5, 0.2), DomainError);
  CHECK_THROWS_AS(mu(Alpha(0.0), 1.0, 0.9), DomainError);
}

TEST_CASE("mhr_beta") {
  const double q = 0.3;
  // beta_q(e) = 1 - (1 + 1 - 2) / log(1/q) = 1.
  CHECK(mhr_beta(q, std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mhr_beta(q, 1.0) < 1.0);
}

TEST_CASE("nature oracle certifies the deterministic ratio") {
  for (double a : {0.0, 0.5, 1.0}) {
    for (int k = 1; k <= 9; ++k) {
      const double q = 0.1 * k;
      const auto ctx = PricingContext::point(Alpha(a), 1.0, q);
      const auto s = solve_deterministic(ctx);
      const double certified = nature_worst_case(Mechanism::deterministic(s.price), ctx, exact()).ratio;
      CHECK(certified == doctest::Approx(s.ratio).epsilon(1e-4));
    }
  }
}
