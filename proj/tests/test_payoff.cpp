#include <doctest.h>

#include <cmath>
#include <random>

#include "bermudan/cubature.hpp"
#include "bermudan/error.hpp"
#include "bermudan/payoff.hpp"
#include "support.hpp"

using namespace bermudan;

TEST_CASE("payoff examples") {
  const BasketPut single(1.0, {1.0});
  const std::vector<double> atm{0.0}, otm{std::log(2.0)}, deep{-60.0};
  CHECK(single.payoff(atm) == 0.0);
  CHECK(single.payoff(otm) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(single.payoff_plus(otm) == 0.0);
  CHECK(single.payoff_plus(deep) == doctest::Approx(1.0).epsilon(1e-15));

  const BasketPut pair(2.0, {0.5, 0.5});
  const std::vector<double> x{0.0, std::log(2.0)};
  const double independent = 2.0 - (0.5 * std::exp(0.0) + 0.5 * std::exp(std::log(2.0)));
  CHECK(pair.payoff(x) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pair.payoff(x) == doctest::Approx(independent).epsilon(1e-15));
  CHECK(pair.payoff_plus(x) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pair.cap() == 2.0);
}

TEST_CASE("payoff is capped by the strike") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 4;
    const BasketPut put(2.0 * (trial % 7) / 6.0, testing::random_simplex(rng, d));
    std::vector<double> x(d);
    for (auto& v : x) v = u(rng);
    CHECK(put.payoff(x) <= put.cap());
    CHECK(put.payoff_plus(x) <= put.cap());
    CHECK(put.payoff_plus(x) >= 0.0);
  }
}

TEST_CASE("drift-adjusted rules leave the payoff and the cap invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + trial % 3;
    RuleSpec spec;
    spec.points_per_axis = 1 + static_cast<std::size_t>(trial % 4);
    spec.sigma = std::vector<double>(d, 0.3);
    spec.t = 0.8;
    if (d > 1 && trial % 2) spec.correlation = testing::random_correlation(rng, d);
    const auto rule = drift_adjust(build_gauss_hermite(spec));
    const BasketPut put(1.3, testing::random_simplex(rng, d));
    std::vector<double> x(d), y(d);
    for (int s = 0; s < 20; ++s) {
      for (auto& v : x) v = u(rng);
      double avg = 0.0, cap = 0.0;
      for (std::size_t k = 0; k < rule.size(); ++k) {
        for (std::size_t i = 0; i < d; ++i) y[i] = x[i] - rule.point(k)[i];
        avg += rule.weights()[k] * put.payoff(y);
        cap += rule.weights()[k] * put.cap();
      }
      CHECK(std::abs(avg - put.payoff(x)) <= 1e-10);
      CHECK(std::abs(cap - put.cap()) <= 1e-12 * put.cap());
    }
  }
}

TEST_CASE("degenerate basket weights are allowed") {
  const BasketPut put(1.0, {0.0, 1.0});
  const std::vector<double> x{100.0, 0.0};
  CHECK(put.payoff(x) == 0.0);
}

TEST_CASE("invalid baskets") {
  CHECK_THROWS_AS(BasketPut(-1.0, {1.0}), Error);
  CHECK_THROWS_AS(BasketPut(1.0, {0.5, 0.6}), Error);
  CHECK_THROWS_AS(BasketPut(1.0, {}), Error);
  const BasketPut put(1.0, {1.0});
  const std::vector<double> wrong{0.0, 0.0};
  CHECK_THROWS_AS((void)put.payoff(wrong), Error);
}
