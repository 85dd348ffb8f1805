#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "robustprice/deterministic.hpp"
#include "robustprice/mechanism.hpp"

using namespace robustprice;

namespace {

NatureOptions exact() {
  NatureOptions o;
  o.r_cap = kInf;
  return o;
}

Mechanism random_mechanism(std::mt19937_64& rng, double lo, double hi, int max_atoms) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int k = 1 + static_cast<int>(u(rng) * max_atoms);
  std::vector<double> atoms;
  for (int j = 0; j < k; ++j) atoms.push_back(lo + (hi - lo) * u(rng));
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  std::vector<double> probs;
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    probs.push_back(u(rng));
    total += probs.back();
  }
  const double mass = 0.5 + 0.5 * u(rng);
  for (double& p : probs) p *= mass / total;
  return Mechanism(atoms, probs);
}

// Brute-force minimum of revenue_ratio over an r grid, plus points just
// below every atom where the right-side infimum is approached.
double brute_force(const Mechanism& m, const PricingContext& ctx, double r_top, int points) {
  const double w = ctx.w();
  double best = kInf;
  auto eval = [&](double r) { best = std::min(best, revenue_ratio(m, WorstCaseDistribution(ctx, r))); };
  const double r_low = ctx.r_low();
  for (int k = 0; k <= points; ++k) eval(r_low + (w - r_low) * k / points);
  if (r_top > w) {
    for (int k = 1; k <= points; ++k) eval(w + (r_top - w) * k / points);
    for (double a : m.atoms()) {
      if (a > w * (1.0 + 1e-9) && a <= r_top) eval(a * (1.0 - 1e-13));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("mechanism construction and helpers") {
  const Mechanism m({0.5, 1.0, 2.0}, {0.2, 0.3, 0.1});
  CHECK(m.size() == 3);
  CHECK(m.total_mass() == doctest::Approx(0.6));
  const Mechanism s = m.scaled(2.0);
  CHECK(s.atoms()[2] == 4.0);
  CHECK(s.probs()[1] == 0.3);
  CHECK(m.pruned(0.15).size() == 2);
  CHECK(Mechanism::deterministic(3.0).total_mass() == 1.0);
  CHECK(Mechanism().empty());

  CHECK_THROWS_AS(Mechanism({1.0, 0.5}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(Mechanism({1.0, 1.0}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(Mechanism({0.0}, {0.5}), DomainError);
  CHECK_THROWS_AS(Mechanism({1.0, 2.0}, {0.6, 0.6}), DomainError);
  CHECK_THROWS_AS(Mechanism({1.0}, {-0.1}), DomainError);
  CHECK_THROWS_AS(Mechanism({1.0}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(m.scaled(0.0), DomainError);
}

TEST_CASE("revenue_ratio examples") {
  const Mechanism dw = Mechanism::deterministic(1.0);
  const auto ctx = PricingContext::point(Alpha(0.0), 1.0, 0.75);
  CHECK(revenue_ratio(dw, WorstCaseDistribution(ctx, 1e6)) == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(revenue_ratio(dw, WorstCaseDistribution(ctx, 1.0)) == doctest::Approx(0.75).epsilon(1e-15));

  const auto wide = PricingContext::point(Alpha(0.0), 1.0, 0.3);
  const Mechanism low({0.35, 0.5}, {0.4, 0.6});
  const WorstCaseDistribution f(wide, 0.8);
  CHECK(revenue_ratio(low, f) == doctest::Approx((0.35 * 0.4 + 0.5 * 0.6) / 0.8).epsilon(1e-15));
}

TEST_CASE("revenue_ratio lies in [0, 1]") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const Alpha alpha(t % 3 == 0 ? 0.0 : u(rng));
    const auto ctx = PricingContext::point(alpha, 1.0, 0.02 + 0.96 * u(rng));
    const Mechanism m = random_mechanism(rng, 0.05, 20.0, 12);
    for (const auto& f : family_grid(ctx, 20, 100.0)) {
      const double ratio = revenue_ratio(m, f);
      CHECK(ratio >= 0.0);
      CHECK(ratio <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("nature oracle examples") {
  const auto regular = PricingContext::point(Alpha(0.0), 1.0, 0.75);
  const auto report = nature_worst_case(Mechanism::deterministic(1.0), regular, exact());
  CHECK(report.ratio == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(report.side == Side::Right);
  CHECK(std::isinf(report.argmin_r));

  // Reference value at mhr q = 0.5: 85.23%.
  const auto mhr = PricingContext::point(Alpha(1.0), 1.0, 0.5);
  const double price = solve_mhr(1.0, 0.5).price;
  CHECK(std::abs(nature_worst_case(Mechanism::deterministic(price), mhr).ratio - 0.8523) <= 0.002);

  // Posting w: min(q, 1 - q) for the regular class.
  for (double q : {0.1, 0.3, 0.5, 0.6, 0.9}) {
    const auto ctx = PricingContext::point(Alpha(0.0), 1.0, q);
    CHECK(nature_worst_case(Mechanism::deterministic(1.0), ctx, exact()).ratio ==
          doctest::Approx(std::min(q, 1.0 - q)).epsilon(1e-12));
  }

  CHECK(nature_worst_case(Mechanism(), regular).ratio == 0.0);
  CHECK(nature_worst_case(Mechanism({1.0}, {0.0}), regular).ratio == 0.0);
  NatureOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(nature_worst_case(Mechanism::deterministic(1.0), regular, bad), DomainError);
  bad = NatureOptions{};
  bad.r_cap = 0.5;
  CHECK_THROWS_AS(nature_worst_case(Mechanism::deterministic(1.0), regular, bad), DomainError);
}

TEST_CASE("finite cap reports the truncation slack") {
  const auto ctx = PricingContext::point(Alpha(0.0), 1.0, 0.4);
  NatureOptions capped;
  capped.r_cap = 250.0;
  const auto report = nature_worst_case(Mechanism::deterministic(1.0), ctx, capped);
  CHECK(report.truncation_slack == doctest::Approx(1.0 / (0.4 * (1.0 + 1.5 * 250.0))));
  const double limit = nature_worst_case(Mechanism::deterministic(1.0), ctx, exact()).ratio;
  CHECK(report.ratio >= limit);
  CHECK(report.ratio - limit <= report.truncation_slack);
}

TEST_CASE("nature oracle matches brute force on random mechanisms") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Alpha alpha(t % 4 == 0 ? 0.0 : 0.2 + 0.8 * u(rng));
    const double q = 0.1 + 0.8 * u(rng);
    const auto ctx = PricingContext::point(alpha, 1.0, q);
    const double r_top = std::min(ctx.r_high(), 30.0);
    const Mechanism m = random_mechanism(rng, ctx.r_low() * 0.9, std::max(r_top, 1.2), 8);
    NatureOptions opt;
    opt.r_cap = 30.0;
    const auto report = nature_worst_case(m, ctx, opt);
    const double brute = brute_force(m, ctx, r_top, 100000);
    // Never above an attained value, and within the search tolerance of it.
    CHECK(report.ratio <= brute + 1e-12);
    CHECK(report.ratio >= brute - 1e-8);
  }
}

TEST_CASE("log-uniform mechanism") {
  const auto edge = PricingContext::point(Alpha(0.0), 1.0, std::exp(-1.0));
  const Mechanism one = log_uniform_mechanism(edge, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.probs()[0] == 1.0);
  for (double q : {0.5, 0.01, 1e-4}) {
    const auto ctx = PricingContext::point(Alpha(0.0), 2.0, q);
    const Mechanism m = log_uniform_mechanism(ctx, 500);
    CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.atoms().front() >= 2.0 * q);
    CHECK(m.atoms().back() <= 2.0);
  }
  const double q = 0.01;
  const double log_inv = std::log(1.0 / q);
  const double bound = std::min((1.0 - q) / log_inv, 1.0 - std::log(2.0 - q) / log_inv);
  const auto ctx = PricingContext::point(Alpha(0.0), 1.0, q);
  CHECK(nature_worst_case(log_uniform_mechanism(ctx, 2000), ctx, exact()).ratio >= bound - 0.01);
  CHECK_THROWS_AS(log_uniform_mechanism(ctx, 0), DomainError);
}

TEST_CASE("tail-weighted mechanism") {
  const auto ctx = PricingContext::point(Alpha(0.0), 1.0, 0.9);
  const Mechanism full = tail_weighted_mechanism(ctx, 1.0, 100);
  REQUIRE(full.size() == 1);
  CHECK(full.atoms()[0] == 1.0);
  CHECK(full.probs()[0] == 1.0);

  for (double q : {0.6, 0.9, 0.99}) {
    const auto c = PricingContext::point(Alpha(0.0), 1.0, q);
    const double a = tail_weighted_default_a(q);
    const Mechanism m = tail_weighted_mechanism(c, a, 1000);
    CHECK(m.total_mass() <= 1.0 + 1e-12);
    CHECK(m.probs()[0] == doctest::Approx(a));
    // The atom at w alone earns a q against the left member at r = w, and
    // the tail is tuned so that nothing does worse.
    const double ratio = nature_worst_case(tail_weighted_mechanism(c, a, 10000), c, exact()).ratio;
    CHECK(ratio <= a * q + 1e-12);
    CHECK(ratio >= a * q - 1e-3);
  }

  // q = 0.9 with the default weight: a = 0.9 / (0.8 log 10 + 0.9).
  CHECK(tail_weighted_default_a(0.9) == doctest::Approx(0.9 / (0.8 * std::log(10.0) + 0.9)).epsilon(1e-14));
  CHECK_THROWS_AS(tail_weighted_mechanism(PricingContext::point(Alpha(0.0), 1.0, 0.4), 0.5, 10), DomainError);
  CHECK_THROWS_AS(tail_weighted_mechanism(PricingContext::point(Alpha(1.0), 1.0, 0.9), 0.5, 10), DomainError);
  CHECK_THROWS_AS(tail_weighted_mechanism(ctx, 1.5, 10), DomainError);
}
