#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bermudan/cubature.hpp"
#include "bermudan/payoff.hpp"

namespace bermudan {

// Uniform rectangular grid over a box in log-price space. Storage order is
// row-major with the last axis fastest.
class LogPriceGrid {
 public:
  LogPriceGrid(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> nodes);

  [[nodiscard]] std::size_t dim() const noexcept { return lo_.size(); }
  [[nodiscard]] std::span<const double> lo() const noexcept { return lo_; }
  [[nodiscard]] std::span<const double> hi() const noexcept { return hi_; }
  [[nodiscard]] std::span<const std::size_t> nodes() const noexcept { return nodes_; }
  [[nodiscard]] double spacing(std::size_t axis) const noexcept { return spacing_[axis]; }
  [[nodiscard]] std::size_t stride(std::size_t axis) const noexcept { return strides_[axis]; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }

  [[nodiscard]] double coordinate(std::size_t axis, std::size_t j) const noexcept;
  void node_point(std::size_t flat, std::span<double> out) const;
  [[nodiscard]] std::vector<double> node_point(std::size_t flat) const;
  [[nodiscard]] bool contains(std::span<const double> x) const noexcept;

  /// Grid extended by ceil(pad / h_i) nodes of the same spacing on both sides
  /// of every axis, so the original nodes stay nodes.
  [[nodiscard]] LogPriceGrid padded(double pad) const;
  /// Number of nodes added per side on `axis` by padded(pad).
  [[nodiscard]] std::size_t padding_nodes(double pad, std::size_t axis) const;

  friend bool operator==(const LogPriceGrid&, const LogPriceGrid&) = default;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<std::size_t> nodes_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

enum class Interpolation {
  log_linear,    // multilinear in x
  price_linear,  // multilinear in exp(x); reproduces the basket payoff exactly
};

enum class ExtensionPolicy {
  payoff_plus,  // g v 0 outside the box
  zero,
};

// Value assigned to points outside the grid box. Independent of the grid
// values, so shifted evaluation stays an affine map with nonnegative weights.
class Extension {
 public:
  static Extension payoff_plus(BasketPut put);
  static Extension zero() noexcept;

  [[nodiscard]] ExtensionPolicy policy() const noexcept { return policy_; }
  [[nodiscard]] double operator()(std::span<const double> x) const;

 private:
  Extension(ExtensionPolicy policy, std::optional<BasketPut> put)
      : policy_(policy), put_(std::move(put)) {}

  ExtensionPolicy policy_;
  std::optional<BasketPut> put_;
};

class GridFunction {
 public:
  GridFunction(LogPriceGrid grid, std::vector<double> values, Extension extension,
               Interpolation interpolation = Interpolation::log_linear);

  [[nodiscard]] const LogPriceGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] const Extension& extension() const noexcept { return extension_; }
  [[nodiscard]] Interpolation interpolation() const noexcept { return interpolation_; }

  [[nodiscard]] double operator()(std::span<const double> x) const;

 private:
  LogPriceGrid grid_;
  std::vector<double> values_;
  Extension extension_;
  Interpolation interpolation_;
};

// Interpolation weights of a point against the grid nodes. Empty `nodes`
// with `inside == false` means the point lies outside the box.
struct Stencil {
  bool inside = false;
  std::vector<std::size_t> nodes;
  std::vector<double> weights;
};

void locate(const LogPriceGrid& grid, Interpolation interpolation, std::span<const double> x,
            Stencil& out);

/// Multilinear interpolation inside the box, the extension value outside.
[[nodiscard]] double evaluate(const GridFunction& f, std::span<const double> x);

/// The averaging operator of a rule compiled against one grid:
///   (A f)_y = sum_j W[y, j] f_j + b_y,
/// where W holds the interpolation weights of the in-box shifted points and b
/// the weighted extension values of the out-of-box ones. W is nonnegative and
/// its rows sum to at most one.
class AveragingOperator {
 public:
  AveragingOperator(const CubatureRule& rule, const LogPriceGrid& grid, const Extension& extension,
                    Interpolation interpolation);

  [[nodiscard]] const LogPriceGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::size_t nonzeros() const noexcept { return columns_.size(); }

  /// Rule mass whose shifted point lands outside the box, per node.
  [[nodiscard]] double outside_mass(std::size_t node) const noexcept { return outside_mass_[node]; }

  void apply(std::span<const double> f, std::span<double> out, unsigned threads = 1) const;
  [[nodiscard]] std::vector<double> apply(std::span<const double> f, unsigned threads = 1) const;

 private:
  LogPriceGrid grid_;
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> columns_;
  std::vector<double> coefficients_;
  std::vector<double> offset_;
  std::vector<double> outside_mass_;
};

/// Node values sum_k a_k f(y - x_k); same grid, extension and interpolation.
[[nodiscard]] GridFunction apply_average(const CubatureRule& rule, const GridFunction& f,
                                         unsigned threads = 1);

/// max over nodes of |f1 - f2|. Throws on grid mismatch.
[[nodiscard]] double sup_distance(const GridFunction& f1, const GridFunction& f2);

/// One row per node in storage order: x_1..x_d, value.
void write_values_csv(const GridFunction& f, std::ostream& os);

}  // namespace bermudan
