#include "bermudan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>

#include "bermudan/error.hpp"

namespace bermudan {

namespace {

class Tree {
 public:
  Tree(const CubatureRule& rule, const BasketPut& put, double discount, std::span<const double> x0)
      : rule_(rule), put_(put), discount_(discount), x0_(x0.begin(), x0.end()), x_(x0.size()) {}

  double value(std::vector<std::uint16_t>& counts, std::size_t remaining) {
    if (remaining > 0) {
      if (auto it = memo_.find(counts); it != memo_.end()) return it->second;
    }
    position(counts);
    const double exercise = put_.payoff(x_);
    if (remaining == 0) return std::max(exercise, 0.0);

    const auto alpha = rule_.weights();
    double continuation = 0.0;
    for (std::size_t k = 0; k < rule_.size(); ++k) {
      ++counts[k];
      continuation += alpha[k] * value(counts, remaining - 1);
      --counts[k];
    }
    const double v = std::max(discount_ * continuation, exercise);
    memo_.emplace(counts, v);
    return v;
  }

 private:
  void position(const std::vector<std::uint16_t>& counts) {
    for (std::size_t i = 0; i < x_.size(); ++i) {
      double shift = 0.0;
      for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] != 0) shift += static_cast<double>(counts[k]) * rule_.point(k)[i];
      }
      x_[i] = x0_[i] - shift;
    }
  }

  const CubatureRule& rule_;
  const BasketPut& put_;
  double discount_;
  std::vector<double> x0_;
  std::vector<double> x_;
  std::map<std::vector<std::uint16_t>, double> memo_;
};

}  // namespace

double tree_price(const CubatureRule& rule, const BasketPut& put, const PricingConfig& cfg,
                  const TreeQuery& query) {
  if (query.depth > query.max_depth) {
    std::ostringstream os;
    os << "tree_price: depth " << query.depth << " exceeds the maximum " << query.max_depth;
    throw Error(ErrorCode::depth_exceeded, os.str());
  }
  if (rule.dim() != put.dim() || query.x0.size() != rule.dim()) {
    throw Error(ErrorCode::invalid_argument, "tree_price: dimension mismatch");
  }
  Tree tree(rule, put, cfg.discount(), query.x0);
  std::vector<std::uint16_t> counts(rule.size(), 0);
  return tree.value(counts, query.depth);
}

OracleComparison tree_vs_grid(const CubatureRule& rule, const BasketPut& put,
                              const PricingConfig& cfg, const LogPriceGrid& region,
                              std::size_t steps, std::span<const std::vector<double>> samples) {
  for (const auto& x : samples) {
    if (x.size() != region.dim() || !region.contains(x)) {
      throw Error(ErrorCode::invalid_argument, "tree_vs_grid: sample point outside the region of interest");
    }
  }
  if (steps > TreeQuery::kDefaultMaxDepth) {
    std::ostringstream os;
    os << "tree_vs_grid: depth " << steps << " exceeds the maximum " << TreeQuery::kDefaultMaxDepth;
    throw Error(ErrorCode::depth_exceeded, os.str());
  }
  IterateOptions options;
  options.fixed_steps = steps;
  const IterationReport run = iterate(cfg, rule, put, region, options);

  OracleComparison out;
  out.steps = steps;
  for (const auto& x : samples) {
    OracleRow row;
    row.x = x;
    row.grid_value = evaluate(run.value, x);
    row.tree_value = tree_price(rule, put, cfg, TreeQuery{.x0 = x, .depth = steps});
    row.abs_diff = std::abs(row.grid_value - row.tree_value);
    out.max_discrepancy = std::max(out.max_discrepancy, row.abs_diff);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<std::vector<double>> diagonal_samples(const LogPriceGrid& region, std::size_t count) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t s = 1; s <= count; ++s) {
    std::vector<double> x(region.dim());
    for (std::size_t i = 0; i < region.dim(); ++i) {
      const double frac = static_cast<double>(s) / static_cast<double>(count + 1);
      const auto last = static_cast<double>(region.nodes()[i] - 1);
      const auto j = static_cast<std::size_t>(std::lround(frac * last));
      x[i] = region.coordinate(i, j);
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace bermudan
