#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "robustprice/deterministic.hpp"
#include "robustprice/lp.hpp"

using namespace robustprice;

namespace {

NatureOptions exact() {
  NatureOptions o;
  o.r_cap = kInf;
  return o;
}

}  // namespace

TEST_CASE("grid layout") {
  const auto ctx = PricingContext::point(Alpha(1.0), 1.0, 0.5);
  const PriceGrid g = build_grid(ctx, 10, 1e-3, 250.0);
  REQUIRE(g.points.size() == 22);
  CHECK(g.split_index == 11);
  CHECK(g.points[0] == doctest::Approx(ctx.r_low()));
  CHECK(g.points[10] == 1.0 - 1e-3);
  CHECK(g.points[11] == 1.0);
  CHECK(g.points.back() == doctest::Approx(ctx.r_high()));
  CHECK_FALSE(g.collapsed);
  for (std::size_t i = 1; i < g.points.size(); ++i) CHECK(g.points[i] > g.points[i - 1]);
  const double low_step = (1.0 - 1e-3 - ctx.r_low()) / 10.0;
  const double high_step = (ctx.r_high() - 1.0) / 10.0;
  CHECK(g.max_gap == doctest::Approx(std::max(low_step, high_step)));

  // The regular class is capped at b.
  const PriceGrid capped = build_grid(PricingContext::point(Alpha(0.0), 1.0, 0.5), 2500, 1e-5, 250.0);
  CHECK(capped.points.size() == 5002);
  CHECK(capped.points.back() == 250.0);
  CHECK(std::isinf(capped.r_high));
}

TEST_CASE("grid collapses when r_h is at w") {
  const auto ctx = PricingContext::point(Alpha(1.0), 1.0, std::exp(-1.0));
  const PriceGrid g = build_grid(ctx, 2, 1e-5, 250.0);
  CHECK(g.collapsed);
  REQUIRE(g.points.size() == 4);
  CHECK(g.points[0] == doctest::Approx(0.5));
  CHECK(g.points[2] == 1.0 - 1e-5);
  CHECK(g.points[3] == 1.0);
  // mhr with r_h below w.
  CHECK(build_grid(PricingContext::point(Alpha(1.0), 1.0, 0.2), 5, 1e-5, 250.0).collapsed);
}

TEST_CASE("grid preconditions") {
  const auto ctx = PricingContext::point(Alpha(0.0), 1.0, 0.5);
  CHECK_THROWS_AS(build_grid(ctx, 1, 1e-5, 250.0), DomainError);
  CHECK_THROWS_AS(build_grid(ctx, 10, 0.0, 250.0), DomainError);
  CHECK_THROWS_AS(build_grid(ctx, 10, 0.5, 250.0), DomainError);
  CHECK_THROWS_AS(build_grid(ctx, 10, 1e-5, 1.0), DomainError);
  const PriceGrid other = build_grid(PricingContext::point(Alpha(0.0), 1.0, 0.3), 10, 1e-5, 250.0);
  CHECK_THROWS_AS(lower_payoff(ctx, other), DomainError);
}

TEST_CASE("ci_interval") {
  const auto [lo, hi] = ci_interval(0.5, 100);
  CHECK(lo == doctest::Approx(0.402).epsilon(1e-12));
  CHECK(hi == doctest::Approx(0.598).epsilon(1e-12));
  const auto [lo2, hi2] = ci_interval(0.5, 100000000);
  CHECK(hi2 - lo2 < 2e-4);
  CHECK_THROWS_AS(ci_interval(0.01, 100), DomainError);
  CHECK_THROWS_AS(ci_interval(0.5, 0), DomainError);
  CHECK_THROWS_AS(ci_interval(1.0, 100), DomainError);
}

TEST_CASE("payoffs are nonnegative and the lower program matches its textbook form") {
  for (double a : {0.0, 0.5, 1.0}) {
    const auto ctx = PricingContext::point(Alpha(a), 1.0, 0.4);
    const PriceGrid g = build_grid(ctx, 8, 1e-5, 250.0);
    for (const auto& m : {lower_payoff(ctx, g), upper_payoff(ctx, g)}) {
      CHECK(m.cols() == g.points.size());
      for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) CHECK(m(i, j) >= 0.0);
      }
    }
    const auto textbook = linprog::solve(lower_lp_model(ctx, g));
    REQUIRE(textbook.status == linprog::Status::Optimal);
    CHECK(textbook.objective_value == doctest::Approx(lower_lp(ctx, g).value).epsilon(1e-9));
    const auto upper_textbook = linprog::solve(upper_lp_model(ctx, g));
    REQUIRE(upper_textbook.status == linprog::Status::Optimal);
    CHECK(upper_textbook.objective_value == doctest::Approx(upper_lp(ctx, g)).epsilon(1e-8));
  }
}

TEST_CASE("solve_maximin edge cases") {
  linprog::DenseMatrix zero_row(2, 3);
  zero_row(0, 0) = 1.0;
  const auto z = solve_maximin(zero_row, linprog::RevisedSimplex{});
  CHECK(z.value == 0.0);

  linprog::DenseMatrix neg(1, 2);
  neg(0, 0) = -1.0;
  neg(0, 1) = 1.0;
  CHECK_THROWS_AS(solve_maximin(neg, linprog::RevisedSimplex{}), std::invalid_argument);

  // Matching pennies scaled: value 1/2 with p = (1/2, 1/2).
  linprog::DenseMatrix pennies(2, 2);
  pennies(0, 0) = 1.0;
  pennies(1, 1) = 1.0;
  const auto s = solve_maximin(pennies, linprog::RevisedSimplex{});
  CHECK(s.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.bound == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.p[0] == doctest::Approx(0.5).epsilon(1e-12));

  // Its own optimal basis restarts with no pivots.
  const auto again = solve_maximin(pennies, linprog::RevisedSimplex{}, &s.basis);
  CHECK(again.iterations == 0);
  CHECK(again.value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sandwich, certificate and duality audit on small grids") {
  for (double a : {0.0, 0.5, 1.0}) {
    for (double q : {0.05, 0.3, 0.5, 0.8}) {
      const auto ctx = PricingContext::point(Alpha(a), 1.0, q);
      for (int n : {2, 20, 100}) {
        const PriceGrid g = build_grid(ctx, n, 1e-5, 250.0);
        const auto lower_sol = solve_maximin(lower_payoff(ctx, g), linprog::RevisedSimplex{});
        // Strong duality: the primal and dual certificates meet.
        CHECK(lower_sol.bound - lower_sol.value <= 1e-8);
        const LowerBound lower = lower_lp(ctx, g);
        const double upper = upper_lp(ctx, g);
        CHECK(lower.value > 0.0);
        CHECK(lower.value <= upper + 1e-9);
        CHECK(lower.mechanism.total_mass() <= 1.0 + 1e-12);
        const double certified = nature_worst_case(lower.mechanism, ctx, exact()).ratio;
        CHECK(certified >= lower.value - 1e-6);
      }
    }
  }
}

TEST_CASE("upper bound dominates the deterministic guarantee") {
  for (double q : {0.25, 0.5, 0.75}) {
    const auto ctx = PricingContext::point(Alpha(1.0), 1.0, q);
    CHECK(upper_lp(ctx, build_grid(ctx, 200, 1e-5, 250.0)) >= solve_mhr(1.0, q).ratio);
  }
}

TEST_CASE("refinement does not lose ground") {
  for (double a : {0.0, 1.0}) {
    const auto ctx = PricingContext::point(Alpha(a), 1.0, 0.5);
    const double coarse = lower_lp(ctx, build_grid(ctx, 2, 1e-5, 250.0)).value;
    const double fine = lower_lp(ctx, build_grid(ctx, 50, 1e-5, 250.0)).value;
    CHECK(coarse <= fine + 1e-9);
    const double gap_coarse = upper_lp(ctx, build_grid(ctx, 50, 1e-5, 250.0)) - fine;
    const auto g200 = build_grid(ctx, 200, 1e-5, 250.0);
    const double gap_fine = upper_lp(ctx, g200) - lower_lp(ctx, g200).value;
    CHECK(gap_fine < gap_coarse);
  }
}

TEST_CASE("warm-started solve reproduces the cold one") {
  // n = 1000 goes through the half-size grids.
  const auto ctx = PricingContext::point(Alpha(1.0), 1.0, 0.5);
  const PriceGrid g = build_grid(ctx, 1000, 1e-5, 250.0);
  const double warm = lower_lp(ctx, g).value;
  const double cold = solve_maximin(lower_payoff(ctx, g), linprog::RevisedSimplex{}).value;
  CHECK(warm == doctest::Approx(cold).epsilon(1e-9));
  const double warm_upper = upper_lp(ctx, g);
  const double cold_upper = solve_maximin(upper_payoff(ctx, g), linprog::RevisedSimplex{}).bound;
  CHECK(warm_upper == doctest::Approx(cold_upper).epsilon(1e-9));
}

TEST_CASE("truncation at b costs at most the tail term") {
  const double q = 0.5;
  const auto ctx = PricingContext::point(Alpha(0.0), 1.0, q);
  // The right grid is uniform on [w, b], so a small n mostly measures the
  // coarser spacing at b = 1000. By n = 1000 that effect is below the term.
  const double at_250 = lower_lp(ctx, build_grid(ctx, 1000, 1e-5, 250.0)).value;
  const double at_1000 = lower_lp(ctx, build_grid(ctx, 1000, 1e-5, 1000.0)).value;
  const double term = 1.0 / (q * (1.0 + (1.0 / q - 1.0) * 250.0));
  CHECK(std::abs(at_1000 - at_250) <= term);
}

TEST_CASE("interval programs") {
  for (double a : {0.0, 1.0}) {
    const LpOptions small{100, 1e-5, 250.0};
    const auto point = PricingContext::point(Alpha(a), 1.0, 0.5);
    const LpBounds at_point = solve_bounds(point, small);

    // A sliver of an interval matches the point program.
    const LpBounds sliver = interval_lp(PricingContext::interval(Alpha(a), 1.0, 0.5 - 1e-9, 0.5), small);
    CHECK(sliver.lower == doctest::Approx(at_point.lower).epsilon(1e-6));

    // Widening never helps, and the interval never beats a point inside it.
    double prev = at_point.lower;
    for (double half : {0.02, 0.05, 0.1}) {
      const auto ctx = PricingContext::interval(Alpha(a), 1.0, 0.5 - half, 0.5 + half);
      const LpBounds b = interval_lp(ctx, small);
      CHECK(b.lower <= prev + 1e-9);
      CHECK(b.lower <= b.upper + 1e-9);
      CHECK(nature_worst_case(b.mechanism, ctx, exact()).ratio >= b.lower - 1e-6);
      for (double q : {0.5 - half, 0.5, 0.5 + half}) {
        CHECK(b.lower <= solve_bounds(PricingContext::point(Alpha(a), 1.0, q), small).lower + 1e-9);
      }
      prev = b.lower;
    }
    CHECK_THROWS_AS(interval_lp(point, small), DomainError);
  }
}

TEST_CASE("mechanism atoms are rescaled by w") {
  const LpOptions small{50, 1e-5, 250.0};
  const auto one = solve_bounds(PricingContext::point(Alpha(0.5), 1.0, 0.3), small);
  const auto three = solve_bounds(PricingContext::point(Alpha(0.5), 3.0, 0.3), small);
  CHECK(three.lower == doctest::Approx(one.lower).epsilon(1e-12));
  REQUIRE(three.mechanism.size() == one.mechanism.size());
  for (std::size_t j = 0; j < one.mechanism.size(); ++j) {
    CHECK(three.mechanism.atoms()[j] == doctest::Approx(3.0 * one.mechanism.atoms()[j]).epsilon(1e-14));
  }
}
