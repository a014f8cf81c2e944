#pragma once

// Shared fixtures for the unit and acceptance suites: random valid pricing
// configurations and the naive (non-recombining) cubature tree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bermudan/bellman.hpp"
#include "bermudan/cubature.hpp"
#include "bermudan/grid.hpp"
#include "bermudan/payoff.hpp"

namespace bermudan::testing {

struct Scenario {
  std::size_t dim;
  std::size_t points_per_axis;
  CubatureRule rule;  // drift-adjusted
  BasketPut put;
  PricingConfig cfg;
  LogPriceGrid region;
  std::vector<double> x0;
};

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t d) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(d);
  double s = 0.0;
  for (auto& v : w) s += (v = e(rng));
  for (auto& v : w) v /= s;
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < d; ++i) rest -= w[i];
  w[d - 1] = rest;
  return w;
}

// Random unit-diagonal correlation matrix built as a normalized Gram matrix.
inline std::vector<double> random_correlation(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(d * d);
  for (auto& x : v) x = n(rng);
  std::vector<double> c(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += v[i * d + k] * v[j * d + k];
      c[i * d + j] = s + (i == j ? 0.5 : 0.0);
    }
  }
  std::vector<double> out(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = c[i * d + j] / std::sqrt(c[i * d + i] * c[j * d + j]);
    out[i * d + i] = 1.0;
  }
  return out;
}

// d in {1,2,3}, points per axis in {1,2,3}, K in [0.5, 2], r t in [0.01, 0.7].
inline Scenario random_scenario(std::mt19937_64& rng, std::size_t dim, std::size_t ppa,
                                bool correlated = false) {
  std::uniform_real_distribution<double> strike(0.5, 2.0), rt(0.01, 0.7), vol(0.15, 0.35),
      interval(0.5, 1.5);
  const double K = strike(rng);
  const double t = interval(rng);
  const double r = rt(rng) / t;
  RuleSpec spec;
  spec.points_per_axis = ppa;
  spec.t = t;
  for (std::size_t i = 0; i < dim; ++i) spec.sigma.push_back(vol(rng));
  if (correlated && dim > 1) spec.correlation = random_correlation(rng, dim);
  CubatureRule rule = drift_adjust(build_gauss_hermite(spec));

  PricingConfig cfg(r, t);
  cfg.eps = 1e-7;
  cfg.max_iters = 4000;
  cfg.tol_eq = 1e-9 * K;
  cfg.pad_factor = 3.0;

  const std::size_t nodes = dim == 1 ? 121 : dim == 2 ? 31 : 13;
  const double center = std::log(K);
  std::vector<double> lo(dim, center - 1.5), hi(dim, center + 1.5);
  std::vector<std::size_t> n(dim, nodes);
  return Scenario{dim,
                  ppa,
                  std::move(rule),
                  BasketPut(K, random_simplex(rng, dim)),
                  cfg,
                  LogPriceGrid(std::move(lo), std::move(hi), std::move(n)),
                  std::vector<double>(dim, center)};
}

// Non-recombining enumeration of all m^n paths; the ground truth for the
// memoized tree.
inline double naive_tree(const CubatureRule& rule, const BasketPut& put, double c,
                         const std::vector<double>& x, std::size_t n) {
  const double g = put.payoff(x);
  if (n == 0) return std::max(g, 0.0);
  double cont = 0.0;
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < rule.size(); ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - rule.point(k)[i];
    cont += rule.weights()[k] * naive_tree(rule, put, c, y, n - 1);
  }
  return std::max(c * cont, g);
}

inline PricingConfig config_with_discount(double c) { return PricingConfig(-std::log(c), 1.0); }

}  // namespace bermudan::testing
