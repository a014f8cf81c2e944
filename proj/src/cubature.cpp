#include "bermudan/cubature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bermudan/error.hpp"

namespace bermudan {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace

CubatureRule::CubatureRule(std::size_t dim, std::vector<double> weights,
                           std::vector<double> points)
    : dim_(dim), weights_(std::move(weights)), points_(std::move(points)) {
  if (dim_ == 0) fail(ErrorCode::invalid_argument, "cubature rule: dim must be positive");
  if (weights_.empty()) fail(ErrorCode::invalid_argument, "cubature rule: needs at least one point");
  if (points_.size() != weights_.size() * dim_) {
    std::ostringstream os;
    os << "cubature rule: " << weights_.size() << " weights but " << points_.size()
       << " point coordinates (expected " << weights_.size() * dim_ << ")";
    fail(ErrorCode::invalid_argument, os.str());
  }
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double w = weights_[k];
    if (!(w >= 0.0 && w <= 1.0)) {
      std::ostringstream os;
      os << "cubature rule: weight " << k << " = " << w << " is outside [0, 1]";
      fail(ErrorCode::invalid_argument, os.str());
    }
  }
  for (double x : points_) {
    if (!std::isfinite(x)) fail(ErrorCode::invalid_argument, "cubature rule: non-finite point coordinate");
  }
  const double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "cubature rule: weights sum to " << sum << ", not 1";
    fail(ErrorCode::invalid_argument, os.str());
  }
}

double CubatureRule::reach() const noexcept {
  double r = 0.0;
  for (double x : points_) r = std::max(r, std::abs(x));
  return r;
}

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
// polynomials: zero diagonal, off-diagonal sqrt(k).
GaussHermiteNodes gauss_hermite_standard(std::size_t n) {
  if (n == 0) fail(ErrorCode::invalid_argument, "gauss_hermite: points_per_axis must be >= 1");
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index k = 1; k < size; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::non_finite, "gauss_hermite: eigen decomposition failed");
  }

  GaussHermiteNodes out;
  out.nodes.resize(n);
  out.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    out.nodes[i] = solver.eigenvalues()(col);
    const double v0 = solver.eigenvectors()(0, col);
    out.weights[i] = v0 * v0;
  }

  // The rule is symmetric about zero; enforce it exactly.
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double node = 0.5 * (out.nodes[j] - out.nodes[i]);
    const double weight = 0.5 * (out.weights[i] + out.weights[j]);
    out.nodes[i] = -node;
    out.nodes[j] = node;
    out.weights[i] = out.weights[j] = weight;
  }
  if (n % 2 == 1) out.nodes[n / 2] = 0.0;

  const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  for (double& w : out.weights) w /= total;
  return out;
}

CubatureRule build_gauss_hermite(const RuleSpec& spec) {
  const std::size_t d = spec.sigma.size();
  if (d == 0) fail(ErrorCode::invalid_argument, "gauss_hermite: sigma must have at least one entry");
  if (spec.points_per_axis == 0) fail(ErrorCode::invalid_argument, "gauss_hermite: points_per_axis must be >= 1");
  for (double s : spec.sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::invalid_argument, "gauss_hermite: sigma entries must be positive");
  }
  if (!(spec.t > 0.0) || !std::isfinite(spec.t)) fail(ErrorCode::invalid_argument, "gauss_hermite: t must be positive");

  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd mixing = Eigen::MatrixXd::Identity(dd, dd);
  if (spec.correlation) {
    const auto& corr = *spec.correlation;
    if (corr.size() != d * d) {
      std::ostringstream os;
      os << "gauss_hermite: correlation must be " << d << "x" << d;
      fail(ErrorCode::invalid_argument, os.str());
    }
    Eigen::MatrixXd c(dd, dd);
    for (Eigen::Index i = 0; i < dd; ++i) {
      for (Eigen::Index j = 0; j < dd; ++j) c(i, j) = corr[static_cast<std::size_t>(i * dd + j)];
    }
    for (Eigen::Index i = 0; i < dd; ++i) {
      if (std::abs(c(i, i) - 1.0) > 1e-12) {
        fail(ErrorCode::invalid_argument, "gauss_hermite: correlation matrix must have unit diagonal");
      }
      for (Eigen::Index j = 0; j < i; ++j) {
        if (std::abs(c(i, j) - c(j, i)) > 1e-12) {
          fail(ErrorCode::invalid_argument, "gauss_hermite: correlation matrix is not symmetric");
        }
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "gauss_hermite: correlation matrix is not positive definite:\n" << c;
      fail(ErrorCode::not_positive_definite, os.str());
    }
    mixing = llt.matrixL();
  }

  const GaussHermiteNodes axis = gauss_hermite_standard(spec.points_per_axis);
  const std::size_t p = spec.points_per_axis;
  std::size_t m = 1;
  for (std::size_t i = 0; i < d; ++i) m *= p;

  std::vector<double> weights(m);
  std::vector<double> points(m * d);
  std::vector<std::size_t> digits(d, 0);
  Eigen::VectorXd z(dd);
  for (std::size_t k = 0; k < m; ++k) {
    // Last axis varies fastest.
    std::size_t rest = k;
    for (std::size_t i = d; i-- > 0;) {
      digits[i] = rest % p;
      rest /= p;
    }
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      w *= axis.weights[digits[i]];
      z(static_cast<Eigen::Index>(i)) = axis.nodes[digits[i]];
    }
    weights[k] = w;
    const Eigen::VectorXd mixed = mixing * z;
    const double root_t = std::sqrt(spec.t);
    for (std::size_t i = 0; i < d; ++i) {
      const double increment = spec.sigma[i] * root_t * mixed(static_cast<Eigen::Index>(i));
      points[k * d + i] = increment == 0.0 ? 0.0 : -increment;
    }
  }

  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return CubatureRule(d, std::move(weights), std::move(points));
}

DriftAdjustment drift_adjust_with_shift(const CubatureRule& rule) {
  const std::size_t d = rule.dim();
  const std::size_t m = rule.size();
  const auto w = rule.weights();
  std::vector<double> shift(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) sum += w[k] * std::exp(-rule.point(k)[i]);
    if (!std::isfinite(sum) || !(sum > 0.0)) {
      std::ostringstream os;
      os << "drift_adjust: exponential moment of coordinate " << i << " is not finite";
      fail(ErrorCode::overflow, os.str());
    }
    shift[i] = std::log(sum);
  }
  std::vector<double> points(rule.points().begin(), rule.points().end());
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < d; ++i) points[k * d + i] += shift[i];
  }
  std::vector<double> weights(w.begin(), w.end());
  return {CubatureRule(d, std::move(weights), std::move(points)), std::move(shift)};
}

CubatureRule drift_adjust(const CubatureRule& rule) { return drift_adjust_with_shift(rule).rule; }

double MartingaleResiduals::max() const noexcept {
  double r = 0.0;
  for (double v : residuals) r = std::max(r, v);
  return r;
}

MartingaleResiduals validate_condition3(const CubatureRule& rule, double tol) {
  MartingaleResiduals out;
  out.residuals.resize(rule.dim());
  const auto w = rule.weights();
  out.pass = true;
  for (std::size_t i = 0; i < rule.dim(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) sum += w[k] * std::exp(-rule.point(k)[i]);
    out.residuals[i] = std::abs(sum - 1.0);
    if (!(out.residuals[i] <= tol)) out.pass = false;
  }
  return out;
}

}  // namespace bermudan
