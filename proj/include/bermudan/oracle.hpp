#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bermudan/bellman.hpp"
#include "bermudan/cubature.hpp"
#include "bermudan/grid.hpp"
#include "bermudan/payoff.hpp"

namespace bermudan {

struct TreeQuery {
  static constexpr std::size_t kDefaultMaxDepth = 8;

  std::vector<double> x0;
  std::size_t depth = 0;
  std::size_t max_depth = kDefaultMaxDepth;
};

/// V_n(x0) for V_0 = g v 0 and V_{j+1}(x) = (c sum_k a_k V_j(x - x_k)) v g(x),
/// evaluated on the recombining cubature tree without any grid. Nodes are
/// keyed by how many times each rule point has been applied, so a depth-n
/// query visits C(n + m - 1, m - 1) states per level at most.
[[nodiscard]] double tree_price(const CubatureRule& rule, const BasketPut& put,
                                const PricingConfig& cfg, const TreeQuery& query);

struct OracleRow {
  std::vector<double> x;
  double grid_value = 0.0;
  double tree_value = 0.0;
  double abs_diff = 0.0;
};

struct OracleComparison {
  std::size_t steps = 0;
  double max_discrepancy = 0.0;
  std::vector<OracleRow> rows;
};

/// Runs exactly `steps` Bellman steps on the padded grid and compares the
/// interpolated q_steps with tree_price at every sample point.
[[nodiscard]] OracleComparison tree_vs_grid(const CubatureRule& rule, const BasketPut& put,
                                            const PricingConfig& cfg, const LogPriceGrid& region,
                                            std::size_t steps,
                                            std::span<const std::vector<double>> samples);

/// `count` points on the diagonal of the region, at fractions j / (count + 1)
/// of each axis and snapped to the nearest node.
[[nodiscard]] std::vector<std::vector<double>> diagonal_samples(const LogPriceGrid& region,
                                                                std::size_t count);

}  // namespace bermudan
