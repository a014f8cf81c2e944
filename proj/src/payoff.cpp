#include "bermudan/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bermudan/error.hpp"

namespace bermudan {

BasketPut::BasketPut(double strike, std::vector<double> basket_weights)
    : strike_(strike), beta_(std::move(basket_weights)) {
  if (!(strike_ >= 0.0) || !std::isfinite(strike_)) {
    throw Error(ErrorCode::invalid_argument, "basket put: strike must be finite and >= 0");
  }
  if (beta_.empty()) throw Error(ErrorCode::invalid_argument, "basket put: basket_weights is empty");
  for (double b : beta_) {
    if (!(b >= 0.0 && b <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "basket put: basket_weights entries must lie in [0, 1]");
    }
  }
  const double sum = std::accumulate(beta_.begin(), beta_.end(), 0.0);
  if (std::abs(sum - 1.0) > kBasketSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "basket put: basket_weights sum to " << sum << ", not 1";
    throw Error(ErrorCode::invalid_argument, os.str());
  }
}

double BasketPut::payoff(std::span<const double> x) const {
  if (x.size() != beta_.size()) {
    throw Error(ErrorCode::invalid_argument, "basket put: point dimension does not match basket");
  }
  double basket = 0.0;
  for (std::size_t i = 0; i < beta_.size(); ++i) {
    if (beta_[i] != 0.0) basket += beta_[i] * std::exp(x[i]);
  }
  return strike_ - basket;
}

double BasketPut::payoff_plus(std::span<const double> x) const { return std::max(payoff(x), 0.0); }

}  // namespace bermudan
