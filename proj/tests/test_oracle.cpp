#include <doctest.h>

#include <cmath>
#include <random>

#include "bermudan/error.hpp"
#include "bermudan/oracle.hpp"
#include "support.hpp"

using namespace bermudan;

namespace {

CubatureRule gh_rule(std::vector<double> sigma, std::size_t ppa) {
  RuleSpec spec;
  spec.points_per_axis = ppa;
  spec.sigma = std::move(sigma);
  return drift_adjust(build_gauss_hermite(spec));
}

}  // namespace

TEST_CASE("tree_price at depth zero is the clipped payoff") {
  const PricingConfig cfg(0.05, 1.0);
  const BasketPut put(1.0, {1.0});
  const auto rule = gh_rule({0.2}, 3);
  for (double x : {-2.0, -0.1, 0.0, 0.7}) {
    const std::vector<double> p{x};
    CHECK(tree_price(rule, put, cfg, TreeQuery{.x0 = p, .depth = 0}) == put.payoff_plus(p));
  }
}

TEST_CASE("tree_price with the identity rule stays at the payoff") {
  const PricingConfig cfg(0.05, 1.0);
  const BasketPut put(1.0, {1.0});
  const CubatureRule identity(1, {1.0}, {0.0});
  for (std::size_t n = 0; n <= 8; ++n) {
    const double v = tree_price(identity, put, cfg, TreeQuery{.x0 = {std::log(0.5)}, .depth = n});
    CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("tree_price two-point example by hand enumeration") {
  const auto cfg = testing::config_with_discount(0.9);
  const BasketPut put(1.0, {1.0});
  const auto rule = drift_adjust(CubatureRule(1, {0.5, 0.5}, {-1.0, 1.0}));
  const double v = tree_price(rule, put, cfg, TreeQuery{.x0 = {0.0}, .depth = 1});
  const double c = cfg.discount();
  const double by_hand = std::max(
      c * (0.5 * put.payoff_plus(std::vector<double>{-rule.point(0)[0]}) +
           0.5 * put.payoff_plus(std::vector<double>{-rule.point(1)[0]})),
      put.payoff(std::vector<double>{0.0}));
  CHECK(v == by_hand);
  // Frozen from an independent scalar evaluation with delta = log cosh 1.
  CHECK(v == doctest::Approx(0.3427173701800942).epsilon(1e-14));
}

TEST_CASE("memoized tree equals naive enumeration") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  const auto cfg = testing::config_with_discount(0.93);
  const std::vector<CubatureRule> rules = {
      gh_rule({0.25}, 1), gh_rule({0.25}, 2), gh_rule({0.25}, 3),
      drift_adjust(CubatureRule(2, {0.2, 0.3, 0.5}, {0.1, -0.2, -0.3, 0.05, 0.2, 0.1})),
  };
  for (const auto& rule : rules) {
    const BasketPut put(1.0, testing::random_simplex(rng, rule.dim()));
    for (int s = 0; s < 10; ++s) {
      std::vector<double> x0(rule.dim());
      for (auto& v : x0) v = u(rng);
      for (std::size_t n = 0; n <= 4; ++n) {
        const double memo = tree_price(rule, put, cfg, TreeQuery{.x0 = x0, .depth = n});
        const double naive = testing::naive_tree(rule, put, cfg.discount(), x0, n);
        CHECK(std::abs(memo - naive) <= 1e-12);
      }
    }
  }
}

TEST_CASE("tree_price is nondecreasing in depth") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const PricingConfig cfg(0.03, 1.0);
  const auto rule = gh_rule({0.2, 0.3}, 2);
  const BasketPut put(1.0, {0.4, 0.6});
  for (int s = 0; s < 10; ++s) {
    const std::vector<double> x0{u(rng), u(rng)};
    double prev = tree_price(rule, put, cfg, TreeQuery{.x0 = x0, .depth = 0});
    for (std::size_t n = 1; n <= 8; ++n) {
      const double v = tree_price(rule, put, cfg, TreeQuery{.x0 = x0, .depth = n});
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("tree_price rejects excessive depth") {
  const PricingConfig cfg(0.05, 1.0);
  const BasketPut put(1.0, {1.0});
  const CubatureRule identity(1, {1.0}, {0.0});
  try {
    (void)tree_price(identity, put, cfg, TreeQuery{.x0 = {0.0}, .depth = 9});
    FAIL("expected depth error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::depth_exceeded);
  }
  CHECK_NOTHROW((void)tree_price(identity, put, cfg, TreeQuery{.x0 = {0.0}, .depth = 12, .max_depth = 12}));
}

TEST_CASE("tree_vs_grid with the identity rule") {
  const PricingConfig cfg(0.05, 1.0);
  const BasketPut put(1.0, {1.0});
  const CubatureRule identity(1, {1.0}, {0.0});
  const LogPriceGrid region({-2.0}, {2.0}, {41});
  const auto samples = diagonal_samples(region, 7);
  const auto cmp = tree_vs_grid(identity, put, cfg, region, 4, samples);
  CHECK(cmp.max_discrepancy <= 1e-12);
  CHECK(cmp.rows.size() == 7);
}

TEST_CASE("tree_vs_grid is exact for spacing-aligned shifts") {
  const PricingConfig cfg(0.05, 1.0);
  const BasketPut put(1.0, {1.0});
  const LogPriceGrid region({-3.0}, {3.0}, {241});
  const double h = region.spacing(0);
  // Weights chosen so that sum a_k exp(-x_k) = 1 with x = (-h, +h).
  const double a = (1.0 - std::exp(-h)) / (std::exp(h) - std::exp(-h));
  const auto rule = drift_adjust(CubatureRule(1, {a, 1.0 - a}, {-h, h}));
  const auto samples = diagonal_samples(region, 9);
  for (std::size_t n = 0; n <= 8; ++n) {
    const auto cmp = tree_vs_grid(rule, put, cfg, region, n, samples);
    CHECK(cmp.max_discrepancy <= 1e-10);
  }
}

TEST_CASE("tree_vs_grid discrepancy shrinks under refinement") {
  const PricingConfig cfg(0.05, 1.0);
  const BasketPut put(1.0, {1.0});
  const auto rule = gh_rule({0.2}, 3);
  std::vector<std::vector<double>> samples;
  for (int i = 0; i < 9; ++i) samples.push_back({-1.0 + 0.25 * i});
  for (const auto mode : {Interpolation::log_linear, Interpolation::price_linear}) {
    PricingConfig c = cfg;
    c.interpolation = mode;
    const auto coarse = tree_vs_grid(rule, put, c, LogPriceGrid({-3.0}, {3.0}, {241}), 5, samples);
    const auto fine = tree_vs_grid(rule, put, c, LogPriceGrid({-3.0}, {3.0}, {481}), 5, samples);
    CHECK(fine.max_discrepancy < coarse.max_discrepancy);
    CHECK(coarse.max_discrepancy <= 5e-3);
  }
}

TEST_CASE("tree_vs_grid rejects samples outside the region") {
  const PricingConfig cfg(0.05, 1.0);
  const BasketPut put(1.0, {1.0});
  const CubatureRule identity(1, {1.0}, {0.0});
  const std::vector<std::vector<double>> outside{{5.0}};
  CHECK_THROWS_AS((void)tree_vs_grid(identity, put, cfg, LogPriceGrid({-1.0}, {1.0}, {11}), 2, outside), Error);
}
