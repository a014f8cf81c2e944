#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bermudan {

/// A finite convex combination of point masses in log-price space.
///
/// The averaging operator induced by a rule is
///   (A f)(y) = sum_k weights[k] * f(y - point(k)),
/// so the stored points are the NEGATED one-step log-price increments: a
/// Gaussian increment dz is stored as -dz. Every consumer of a rule relies on
/// this convention.
class CubatureRule {
 public:
  static constexpr double kWeightSumTolerance = 1e-12;

  /// `points` is row-major, size() rows of dim coordinates. Throws Error with
  /// ErrorCode::invalid_argument when the invariants do not hold.
  CubatureRule(std::size_t dim, std::vector<double> weights, std::vector<double> points);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
  [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
  [[nodiscard]] std::span<const double> point(std::size_t k) const noexcept {
    return std::span<const double>(points_).subspan(k * dim_, dim_);
  }

  /// max_k ||x_k||_inf, the farthest a single application of A reaches.
  [[nodiscard]] double reach() const noexcept;

  friend bool operator==(const CubatureRule&, const CubatureRule&) = default;

 private:
  std::size_t dim_;
  std::vector<double> weights_;
  std::vector<double> points_;
};

struct RuleSpec {
  std::size_t points_per_axis = 1;
  std::vector<double> sigma;  // per-asset volatility per unit time
  double t = 1.0;             // exercise interval
  // Row-major dim x dim correlation matrix; absent means independent assets.
  std::optional<std::vector<double>> correlation;
};

/// Nodes and weights of the n-point Gauss-Hermite rule for N(0, 1).
struct GaussHermiteNodes {
  std::vector<double> nodes;
  std::vector<double> weights;
};

[[nodiscard]] GaussHermiteNodes gauss_hermite_standard(std::size_t n);

/// Tensor-product Gauss-Hermite rule for increments with covariance
/// t * diag(sigma) C diag(sigma), mixed through the Cholesky factor of C.
[[nodiscard]] CubatureRule build_gauss_hermite(const RuleSpec& spec);

struct DriftAdjustment {
  CubatureRule rule;
  std::vector<double> shift;  // delta_i added to every point's coordinate i
};

/// Shifts each coordinate by delta_i = log(sum_k a_k exp(-x_ki)) so that
/// sum_k a_k exp(-x'_ki) = 1. Weights are copied untouched.
[[nodiscard]] DriftAdjustment drift_adjust_with_shift(const CubatureRule& rule);
[[nodiscard]] CubatureRule drift_adjust(const CubatureRule& rule);

struct MartingaleResiduals {
  std::vector<double> residuals;  // |sum_k a_k exp(-x_ki) - 1| per coordinate
  bool pass = false;

  [[nodiscard]] double max() const noexcept;
};

[[nodiscard]] MartingaleResiduals validate_condition3(const CubatureRule& rule, double tol);

}  // namespace bermudan
