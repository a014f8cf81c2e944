#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bermudan/cubature.hpp"
#include "bermudan/grid.hpp"
#include "bermudan/payoff.hpp"

namespace bermudan {

// Tolerances at which the iteration checks the convergence properties.
inline constexpr double kMonotoneTolerance = 1e-12;
inline constexpr double kCapTolerance = 1e-12;
inline constexpr double kMembershipTolerance = 1e-10;
inline constexpr double kContractionSlack = 1e-10;
inline constexpr double kRatioFloor = 1e-14;  // ratios are defined only above this delta
inline constexpr double kCondition3Tolerance = 1e-10;

/// Discounting, stopping and discretization settings. The discount factor is
/// always derived as c = exp(-r t).
class PricingConfig {
 public:
  PricingConfig(double rate, double interval);

  [[nodiscard]] double rate() const noexcept { return rate_; }
  [[nodiscard]] double interval() const noexcept { return interval_; }
  [[nodiscard]] double discount() const noexcept { return discount_; }

  double eps = 1e-8;
  std::size_t max_iters = 10000;
  double tol_eq = 1e-9;
  double pad_factor = 3.0;
  ExtensionPolicy extension = ExtensionPolicy::payoff_plus;
  Interpolation interpolation = Interpolation::price_linear;
  unsigned threads = 1;

 private:
  double rate_;
  double interval_;
  double discount_;
};

/// Region of interest enlarged by pad_factor * max_k ||x_k||_inf on each side.
[[nodiscard]] LogPriceGrid pad_grid(const LogPriceGrid& region, const CubatureRule& rule,
                                    double pad_factor);

// One rule compiled against one grid: the averaging operator and the payoff
// sampled at the nodes. Immutable once built.
class BellmanEngine {
 public:
  BellmanEngine(const PricingConfig& cfg, const CubatureRule& rule, const BasketPut& put,
                const LogPriceGrid& grid);
  BellmanEngine(const PricingConfig& cfg, const CubatureRule& rule, const BasketPut& put,
                const LogPriceGrid& grid, Extension extension, Interpolation interpolation);

  [[nodiscard]] const LogPriceGrid& grid() const noexcept { return op_.grid(); }
  [[nodiscard]] const AveragingOperator& averaging() const noexcept { return op_; }
  [[nodiscard]] std::span<const double> payoff_values() const noexcept { return payoff_; }
  [[nodiscard]] double discount() const noexcept { return discount_; }
  [[nodiscard]] double strike() const noexcept { return strike_; }

  [[nodiscard]] std::vector<double> seed_payoff_plus() const;
  [[nodiscard]] std::vector<double> seed_cap() const;

  /// (c * A f) v g at every node; `averaged`, when given, receives A f.
  void step(std::span<const double> f, std::span<double> out,
            std::vector<double>* averaged = nullptr) const;
  [[nodiscard]] std::vector<double> step(std::span<const double> f) const;

  [[nodiscard]] GridFunction wrap(std::vector<double> values) const;

 private:
  AveragingOperator op_;
  Extension extension_;
  Interpolation interpolation_;
  std::vector<double> payoff_;
  double discount_;
  double strike_;
  unsigned threads_;
};

/// One application of f -> (c A f) v g on f's grid.
[[nodiscard]] GridFunction bellman_step(const PricingConfig& cfg, const CubatureRule& rule,
                                        const BasketPut& put, const GridFunction& f);

/// delta * c / (1 - c) <= eps: the geometric tail bound on the distance from
/// the next iterate to the limit.
[[nodiscard]] bool stopping_rule(const PricingConfig& cfg, std::span<const double> deltas);
[[nodiscard]] bool stopping_rule(double discount, double eps, double delta) noexcept;

/// Nodes where f equals the payoff within tol_eq and the payoff is positive.
[[nodiscard]] std::vector<bool> exercise_region(const BasketPut& put, const GridFunction& f,
                                                double tol_eq);

/// f <= K and A f >= f nodewise within kMembershipTolerance.
[[nodiscard]] bool membership_Q(const PricingConfig& cfg, const CubatureRule& rule,
                                const BasketPut& put, const GridFunction& f);

struct NodeFailure {
  std::size_t step = 0;
  std::size_t node = 0;
  std::vector<double> x;
  double excess = 0.0;
};

struct IterateOptions {
  // Apply exactly this many steps, ignoring the stopping rule.
  std::optional<std::size_t> fixed_steps;
  bool record_iterates = false;
  bool record_masks = false;
  std::optional<std::vector<double>> x0;
};

struct IterationReport {
  LogPriceGrid region;  // unpadded region of interest
  double discount = 0.0;
  std::size_t n_stop = 0;  // number of steps applied
  bool converged = false;
  std::vector<double> deltas;                 // deltas[n] = ||q_{n+1} - q_n||
  std::vector<double> ratios;                 // deltas[n] / deltas[n-1], NaN when undefined
  std::vector<double> min_increments;         // min over nodes of q_{n+1} - q_n
  std::vector<double> max_values;             // max over nodes of q_n, n = 0..n_stop
  std::vector<std::size_t> exercise_counts;   // |exercise region of q_n|, n = 0..n_stop
  std::vector<bool> in_q;                     // membership_Q(q_n), n = 0..n_stop
  std::optional<NodeFailure> first_q_failure;
  std::size_t nesting_violations = 0;         // nodes entering the exercise region
  std::size_t contraction_violations = 0;
  double max_ratio = 0.0;
  double residual = 0.0;                      // ||D q_final - q_final||
  double tail_bound = 0.0;                    // c / (1 - c) * deltas.back()
  std::optional<double> price_at_x0;
  GridFunction value;                         // q_final on the padded grid
  std::vector<GridFunction> iterates;         // q_0..q_final when recorded
  std::vector<std::vector<bool>> masks;       // exercise regions when recorded
};

/// Value iteration from q_0 = g v 0 on the padded grid. Throws
/// InvariantViolation when an iterate decreases or exceeds the cap.
[[nodiscard]] IterationReport iterate(const PricingConfig& cfg, const CubatureRule& rule,
                                      const BasketPut& put, const LogPriceGrid& region,
                                      const IterateOptions& options = {});

struct SmallestFixedPointReport {
  double min_gap = 0.0;  // min over nodes of q_down - q_up
  double residual_up = 0.0;
  double residual_down = 0.0;
  std::size_t n_stop_down = 0;
  bool converged_down = false;
  GridFunction down;
};

/// Runs the descending iteration from the cap h = K and compares its limit
/// with an upward run.
[[nodiscard]] SmallestFixedPointReport verify_smallest(const PricingConfig& cfg,
                                                       const CubatureRule& rule,
                                                       const BasketPut& put,
                                                       const LogPriceGrid& region,
                                                       const IterationReport& up);
[[nodiscard]] SmallestFixedPointReport verify_smallest(const PricingConfig& cfg,
                                                       const CubatureRule& rule,
                                                       const BasketPut& put,
                                                       const LogPriceGrid& region);

}  // namespace bermudan
