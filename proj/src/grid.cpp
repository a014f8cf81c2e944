#include "bermudan/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "bermudan/error.hpp"
#include "detail.hpp"

namespace bermudan {

namespace {

// Shifted points closer than this (in cell units) to a node snap onto it,
// which keeps node evaluation bitwise exact despite coordinate roundoff.
constexpr double kSnap = 1e-12;

}  // namespace

LogPriceGrid::LogPriceGrid(std::vector<double> lo, std::vector<double> hi,
                           std::vector<std::size_t> nodes)
    : lo_(std::move(lo)), hi_(std::move(hi)), nodes_(std::move(nodes)) {
  const std::size_t d = lo_.size();
  if (d == 0) throw Error(ErrorCode::invalid_argument, "grid: dimension must be positive");
  if (hi_.size() != d || nodes_.size() != d) {
    throw Error(ErrorCode::invalid_argument, "grid: lo, hi and n must have the same length");
  }
  spacing_.resize(d);
  strides_.resize(d);
  size_ = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]) || !(lo_[i] < hi_[i])) {
      std::ostringstream os;
      os << "grid: axis " << i << " needs finite lo < hi";
      throw Error(ErrorCode::invalid_argument, os.str());
    }
    if (nodes_[i] < 2) {
      std::ostringstream os;
      os << "grid: axis " << i << " needs at least 2 nodes";
      throw Error(ErrorCode::invalid_argument, os.str());
    }
    spacing_[i] = (hi_[i] - lo_[i]) / static_cast<double>(nodes_[i] - 1);
    if (size_ > std::numeric_limits<std::uint32_t>::max() / nodes_[i]) {
      throw Error(ErrorCode::invalid_argument, "grid: too many nodes");
    }
    size_ *= nodes_[i];
  }
  std::size_t stride = 1;
  for (std::size_t i = d; i-- > 0;) {
    strides_[i] = stride;
    stride *= nodes_[i];
  }
}

double LogPriceGrid::coordinate(std::size_t axis, std::size_t j) const noexcept {
  if (j + 1 == nodes_[axis]) return hi_[axis];
  return lo_[axis] + static_cast<double>(j) * spacing_[axis];
}

void LogPriceGrid::node_point(std::size_t flat, std::span<double> out) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    out[i] = coordinate(i, (flat / strides_[i]) % nodes_[i]);
  }
}

std::vector<double> LogPriceGrid::node_point(std::size_t flat) const {
  std::vector<double> x(dim());
  node_point(flat, x);
  return x;
}

bool LogPriceGrid::contains(std::span<const double> x) const noexcept {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(x[i] >= lo_[i] && x[i] <= hi_[i])) return false;
  }
  return true;
}

std::size_t LogPriceGrid::padding_nodes(double pad, std::size_t axis) const {
  if (!(pad > 0.0)) return 0;
  return static_cast<std::size_t>(std::ceil(pad / spacing_[axis] - 1e-9));
}

LogPriceGrid LogPriceGrid::padded(double pad) const {
  if (!(pad >= 0.0) || !std::isfinite(pad)) {
    throw Error(ErrorCode::invalid_argument, "grid: padding must be finite and >= 0");
  }
  std::vector<double> lo(lo_), hi(hi_);
  std::vector<std::size_t> n(nodes_);
  for (std::size_t i = 0; i < dim(); ++i) {
    const std::size_t extra = padding_nodes(pad, i);
    lo[i] -= static_cast<double>(extra) * spacing_[i];
    hi[i] += static_cast<double>(extra) * spacing_[i];
    n[i] += 2 * extra;
  }
  return LogPriceGrid(std::move(lo), std::move(hi), std::move(n));
}

Extension Extension::payoff_plus(BasketPut put) {
  return Extension(ExtensionPolicy::payoff_plus, std::move(put));
}

Extension Extension::zero() noexcept { return Extension(ExtensionPolicy::zero, std::nullopt); }

double Extension::operator()(std::span<const double> x) const {
  switch (policy_) {
    case ExtensionPolicy::payoff_plus:
      return put_->payoff_plus(x);
    case ExtensionPolicy::zero:
      return 0.0;
  }
  return 0.0;
}

GridFunction::GridFunction(LogPriceGrid grid, std::vector<double> values, Extension extension,
                           Interpolation interpolation)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      extension_(std::move(extension)),
      interpolation_(interpolation) {
  if (values_.size() != grid_.size()) {
    std::ostringstream os;
    os << "grid function: " << values_.size() << " values for " << grid_.size() << " nodes";
    throw Error(ErrorCode::invalid_argument, os.str());
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_[j])) {
      std::ostringstream os;
      os << "grid function: non-finite value at node " << j;
      throw Error(ErrorCode::non_finite, os.str());
    }
  }
}

double GridFunction::operator()(std::span<const double> x) const { return evaluate(*this, x); }

void locate(const LogPriceGrid& grid, Interpolation interpolation, std::span<const double> x,
            Stencil& out) {
  out.nodes.assign(1, 0);
  out.weights.assign(1, 1.0);
  // Inside test in cell units, so points within kSnap of a face count as on it.
  out.inside = true;
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    const double s = (x[i] - grid.lo()[i]) / grid.spacing(i);
    if (!(s >= -kSnap && s <= static_cast<double>(grid.nodes()[i] - 1) + kSnap)) {
      out.inside = false;
      out.nodes.clear();
      out.weights.clear();
      return;
    }
  }
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    const std::size_t last_cell = grid.nodes()[i] - 2;
    const double h = grid.spacing(i);
    const double s = std::max(0.0, (x[i] - grid.lo()[i]) / h);
    auto cell = static_cast<std::size_t>(std::min(std::floor(s), static_cast<double>(last_cell)));
    double frac = s - static_cast<double>(cell);
    if (frac < kSnap) {
      frac = 0.0;
    } else if (frac > 1.0 - kSnap) {
      if (cell < last_cell) {
        ++cell;
        frac = 0.0;
      } else {
        frac = 1.0;
      }
    }
    if (interpolation == Interpolation::price_linear && frac > 0.0 && frac < 1.0) {
      frac = std::expm1(frac * h) / std::expm1(h);
    }

    const std::size_t base = cell * grid.stride(i);
    if (frac == 0.0) {
      for (auto& n : out.nodes) n += base;
    } else if (frac == 1.0) {
      for (auto& n : out.nodes) n += base + grid.stride(i);
    } else {
      const std::size_t count = out.nodes.size();
      for (std::size_t c = 0; c < count; ++c) {
        out.nodes.push_back(out.nodes[c] + base + grid.stride(i));
        out.weights.push_back(out.weights[c] * frac);
        out.nodes[c] += base;
        out.weights[c] *= 1.0 - frac;
      }
    }
  }
}

double evaluate(const GridFunction& f, std::span<const double> x) {
  if (x.size() != f.grid().dim()) {
    throw Error(ErrorCode::invalid_argument, "evaluate: point dimension does not match grid");
  }
  thread_local Stencil stencil;
  locate(f.grid(), f.interpolation(), x, stencil);
  if (!stencil.inside) return f.extension()(x);
  const auto values = f.values();
  double v = 0.0;
  for (std::size_t c = 0; c < stencil.nodes.size(); ++c) v += stencil.weights[c] * values[stencil.nodes[c]];
  return v;
}

AveragingOperator::AveragingOperator(const CubatureRule& rule, const LogPriceGrid& grid,
                                     const Extension& extension, Interpolation interpolation)
    : grid_(grid) {
  if (rule.dim() != grid.dim()) {
    throw Error(ErrorCode::grid_mismatch, "averaging operator: rule and grid dimensions differ");
  }
  const std::size_t d = grid.dim();
  const std::size_t n = grid.size();
  const auto alpha = rule.weights();
  row_start_.reserve(n + 1);
  row_start_.push_back(0);
  offset_.assign(n, 0.0);
  outside_mass_.assign(n, 0.0);

  std::vector<double> y(d), z(d);
  Stencil stencil;
  std::vector<std::pair<std::uint32_t, double>> row;
  for (std::size_t node = 0; node < n; ++node) {
    grid.node_point(node, y);
    row.clear();
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const auto xk = rule.point(k);
      for (std::size_t i = 0; i < d; ++i) z[i] = y[i] - xk[i];
      locate(grid, interpolation, z, stencil);
      if (!stencil.inside) {
        offset_[node] += alpha[k] * extension(z);
        outside_mass_[node] += alpha[k];
        continue;
      }
      for (std::size_t c = 0; c < stencil.nodes.size(); ++c) {
        row.emplace_back(static_cast<std::uint32_t>(stencil.nodes[c]), alpha[k] * stencil.weights[c]);
      }
    }
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t e = 0; e < row.size();) {
      const std::uint32_t col = row[e].first;
      double coeff = 0.0;
      for (; e < row.size() && row[e].first == col; ++e) coeff += row[e].second;
      if (coeff == 0.0) continue;
      columns_.push_back(col);
      coefficients_.push_back(coeff);
    }
    row_start_.push_back(columns_.size());
  }
}

void AveragingOperator::apply(std::span<const double> f, std::span<double> out,
                              unsigned threads) const {
  if (f.size() != grid_.size() || out.size() != grid_.size()) {
    throw Error(ErrorCode::grid_mismatch, "averaging operator: value vector does not match grid");
  }
  detail::parallel_for(grid_.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t y = begin; y < end; ++y) {
      double acc = 0.0;
      for (std::size_t e = row_start_[y]; e < row_start_[y + 1]; ++e) {
        acc += coefficients_[e] * f[columns_[e]];
      }
      out[y] = acc + offset_[y];
    }
  });
}

std::vector<double> AveragingOperator::apply(std::span<const double> f, unsigned threads) const {
  std::vector<double> out(grid_.size());
  apply(f, out, threads);
  return out;
}

GridFunction apply_average(const CubatureRule& rule, const GridFunction& f, unsigned threads) {
  const AveragingOperator op(rule, f.grid(), f.extension(), f.interpolation());
  return GridFunction(f.grid(), op.apply(f.values(), threads), f.extension(), f.interpolation());
}

double sup_distance(const GridFunction& f1, const GridFunction& f2) {
  if (!(f1.grid() == f2.grid())) {
    throw Error(ErrorCode::grid_mismatch, "sup_distance: functions live on different grids");
  }
  const auto a = f1.values();
  const auto b = f2.values();
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

void write_values_csv(const GridFunction& f, std::ostream& os) {
  const auto& grid = f.grid();
  for (std::size_t i = 0; i < grid.dim(); ++i) os << "x_" << (i + 1) << ',';
  os << "value\n";
  std::vector<double> x(grid.dim());
  const auto values = f.values();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.node_point(node, x);
    for (double xi : x) os << detail::format_double(xi) << ',';
    os << detail::format_double(values[node]) << '\n';
  }
}

}  // namespace bermudan
