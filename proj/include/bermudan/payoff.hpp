#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bermudan {

// Put on the weighted arithmetic average of a basket, in log-price
// coordinates: g(x) = K - sum_i beta_i exp(x_i). The constant K caps both g
// and g v 0.
class BasketPut {
 public:
  static constexpr double kBasketSumTolerance = 1e-12;

  BasketPut(double strike, std::vector<double> basket_weights);

  [[nodiscard]] double strike() const noexcept { return strike_; }
  [[nodiscard]] double cap() const noexcept { return strike_; }
  [[nodiscard]] std::size_t dim() const noexcept { return beta_.size(); }
  [[nodiscard]] std::span<const double> basket_weights() const noexcept { return beta_; }

  [[nodiscard]] double payoff(std::span<const double> x) const;
  [[nodiscard]] double payoff_plus(std::span<const double> x) const;

  friend bool operator==(const BasketPut&, const BasketPut&) = default;

 private:
  double strike_;
  std::vector<double> beta_;
};

}  // namespace bermudan
