#include "bermudan/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bermudan/error.hpp"
#include "detail.hpp"

namespace bermudan {

namespace {

Extension make_extension(ExtensionPolicy policy, const BasketPut& put) {
  return policy == ExtensionPolicy::zero ? Extension::zero() : Extension::payoff_plus(put);
}

std::string describe_node(const LogPriceGrid& grid, std::size_t node) {
  std::ostringstream os;
  os.precision(17);
  os << "node " << node << " (x = [";
  const auto x = grid.node_point(node);
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "])";
  return os.str();
}

void require_compatible(const CubatureRule& rule, const BasketPut& put, std::size_t grid_dim) {
  if (rule.dim() != put.dim() || rule.dim() != grid_dim) {
    std::ostringstream os;
    os << "dimension mismatch: rule " << rule.dim() << ", basket " << put.dim() << ", grid "
       << grid_dim;
    throw Error(ErrorCode::invalid_argument, os.str());
  }
}

const CubatureRule& checked(const CubatureRule& rule, const BasketPut& put, std::size_t grid_dim) {
  require_compatible(rule, put, grid_dim);
  return rule;
}

void require_martingale(const CubatureRule& rule) {
  const auto check = validate_condition3(rule, kCondition3Tolerance);
  if (!check.pass) {
    std::ostringstream os;
    os.precision(17);
    os << "rule violates sum_k a_k exp(-x_ki) = 1 (max residual " << check.max()
       << "); apply drift_adjust first";
    throw Error(ErrorCode::invalid_argument, os.str());
  }
}

std::size_t count_true(const std::vector<bool>& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

std::vector<bool> exercise_mask(std::span<const double> f, std::span<const double> g,
                                double tol_eq) {
  std::vector<bool> mask(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) mask[j] = g[j] > 0.0 && std::abs(f[j] - g[j]) <= tol_eq;
  return mask;
}

// First node where f > K + tol or A f < f - tol.
std::optional<std::pair<std::size_t, double>> q_failure(std::span<const double> f,
                                                        std::span<const double> averaged,
                                                        double strike) {
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double over_cap = f[j] - strike;
    const double deficit = f[j] - averaged[j];
    if (over_cap > kMembershipTolerance) return std::pair{j, over_cap};
    if (deficit > kMembershipTolerance) return std::pair{j, deficit};
  }
  return std::nullopt;
}

double max_of(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

}  // namespace

PricingConfig::PricingConfig(double rate, double interval)
    : rate_(rate), interval_(interval), discount_(std::exp(-rate * interval)) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::invalid_argument, "pricing: r must be positive");
  }
  if (!(interval > 0.0) || !std::isfinite(interval)) {
    throw Error(ErrorCode::invalid_argument, "pricing: t must be positive");
  }
  if (!(discount_ > 0.0 && discount_ < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "pricing: exp(-r t) must lie strictly inside (0, 1)");
  }
}

LogPriceGrid pad_grid(const LogPriceGrid& region, const CubatureRule& rule, double pad_factor) {
  if (!(pad_factor >= 0.0) || !std::isfinite(pad_factor)) {
    throw Error(ErrorCode::invalid_argument, "pricing: pad_factor must be finite and >= 0");
  }
  return region.padded(pad_factor * rule.reach());
}

BellmanEngine::BellmanEngine(const PricingConfig& cfg, const CubatureRule& rule,
                             const BasketPut& put, const LogPriceGrid& grid)
    : BellmanEngine(cfg, rule, put, grid, make_extension(cfg.extension, put), cfg.interpolation) {}

BellmanEngine::BellmanEngine(const PricingConfig& cfg, const CubatureRule& rule,
                             const BasketPut& put, const LogPriceGrid& grid, Extension extension,
                             Interpolation interpolation)
    : op_(checked(rule, put, grid.dim()), grid, extension, interpolation),
      extension_(std::move(extension)),
      interpolation_(interpolation),
      payoff_(grid.size()),
      discount_(cfg.discount()),
      strike_(put.strike()),
      threads_(cfg.threads) {
  std::vector<double> x(grid.dim());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    grid.node_point(j, x);
    payoff_[j] = put.payoff(x);
  }
}

std::vector<double> BellmanEngine::seed_payoff_plus() const {
  std::vector<double> q(payoff_.size());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = std::max(payoff_[j], 0.0);
  return q;
}

std::vector<double> BellmanEngine::seed_cap() const { return std::vector<double>(payoff_.size(), strike_); }

void BellmanEngine::step(std::span<const double> f, std::span<double> out,
                         std::vector<double>* averaged) const {
  std::vector<double> local;
  std::vector<double>& af = averaged ? *averaged : local;
  af.resize(f.size());
  op_.apply(f, af, threads_);
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double v = std::max(discount_ * af[j], payoff_[j]);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::non_finite, "bellman step: non-finite value at " + describe_node(grid(), j));
    }
    out[j] = v;
  }
}

std::vector<double> BellmanEngine::step(std::span<const double> f) const {
  std::vector<double> out(f.size());
  step(f, out);
  return out;
}

GridFunction BellmanEngine::wrap(std::vector<double> values) const {
  return GridFunction(grid(), std::move(values), extension_, interpolation_);
}

GridFunction bellman_step(const PricingConfig& cfg, const CubatureRule& rule, const BasketPut& put,
                          const GridFunction& f) {
  require_martingale(rule);
  for (std::size_t j = 0; j < f.values().size(); ++j) {
    if (f.values()[j] < 0.0) {
      throw Error(ErrorCode::invalid_argument,
                  "bellman step: input is negative at " + describe_node(f.grid(), j));
    }
  }
  const BellmanEngine engine(cfg, rule, put, f.grid(), f.extension(), f.interpolation());
  return engine.wrap(engine.step(f.values()));
}

bool stopping_rule(double discount, double eps, double delta) noexcept {
  return delta * discount / (1.0 - discount) <= eps;
}

bool stopping_rule(const PricingConfig& cfg, std::span<const double> deltas) {
  if (deltas.empty()) throw Error(ErrorCode::invalid_argument, "stopping rule: no delta recorded");
  return stopping_rule(cfg.discount(), cfg.eps, deltas.back());
}

std::vector<bool> exercise_region(const BasketPut& put, const GridFunction& f, double tol_eq) {
  const auto& grid = f.grid();
  std::vector<double> g(grid.size());
  std::vector<double> x(grid.dim());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    grid.node_point(j, x);
    g[j] = put.payoff(x);
  }
  return exercise_mask(f.values(), g, tol_eq);
}

bool membership_Q(const PricingConfig& cfg, const CubatureRule& rule, const BasketPut& put,
                  const GridFunction& f) {
  (void)cfg;
  require_compatible(rule, put, f.grid().dim());
  const AveragingOperator op(rule, f.grid(), f.extension(), f.interpolation());
  const auto averaged = op.apply(f.values());
  return !q_failure(f.values(), averaged, put.cap()).has_value();
}

IterationReport iterate(const PricingConfig& cfg, const CubatureRule& rule, const BasketPut& put,
                        const LogPriceGrid& region, const IterateOptions& options) {
  require_compatible(rule, put, region.dim());
  require_martingale(rule);

  const LogPriceGrid grid = pad_grid(region, rule, cfg.pad_factor);
  const BellmanEngine engine(cfg, rule, put, grid);
  const auto g = engine.payoff_values();
  const double c = cfg.discount();
  const double strike = put.strike();

  std::vector<double> q = engine.seed_payoff_plus();
  std::vector<double> next(q.size());
  std::vector<double> averaged;

  std::vector<double> deltas, ratios, min_increments, max_values;
  std::vector<std::size_t> exercise_counts;
  std::vector<bool> in_q;
  std::optional<NodeFailure> first_q_failure;
  std::size_t nesting_violations = 0;
  std::size_t contraction_violations = 0;
  double max_ratio = 0.0;
  std::vector<GridFunction> iterates;
  std::vector<std::vector<bool>> masks;

  std::vector<bool> mask = exercise_mask(q, g, cfg.tol_eq);
  exercise_counts.push_back(count_true(mask));
  max_values.push_back(max_of(q));
  if (options.record_iterates) iterates.push_back(engine.wrap(q));
  if (options.record_masks) masks.push_back(mask);

  auto record_membership = [&](std::size_t n) {
    const auto failure = q_failure(q, averaged, strike);
    in_q.push_back(!failure.has_value());
    if (failure && !first_q_failure) {
      first_q_failure = NodeFailure{n, failure->first, grid.node_point(failure->first), failure->second};
    }
  };

  const std::size_t limit = options.fixed_steps.value_or(cfg.max_iters);
  bool converged = false;
  std::size_t steps = 0;
  while (steps < limit) {
    const std::size_t n = steps;
    engine.step(q, next, &averaged);
    record_membership(n);

    double min_inc = std::numeric_limits<double>::infinity();
    std::size_t min_node = 0;
    double delta = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double inc = next[j] - q[j];
      if (inc < min_inc) {
        min_inc = inc;
        min_node = j;
      }
      delta = std::max(delta, std::abs(inc));
    }
    if (min_inc < -kMonotoneTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "iterate: monotonicity violated at step " << n + 1 << ", " << describe_node(grid, min_node)
         << ": q_{n+1} - q_n = " << min_inc;
      throw InvariantViolation("monotone", n + 1, min_node, -min_inc, os.str());
    }
    const double top = max_of(next);
    if (top > strike + kCapTolerance) {
      const auto node = static_cast<std::size_t>(std::max_element(next.begin(), next.end()) - next.begin());
      std::ostringstream os;
      os.precision(17);
      os << "iterate: value exceeds the strike at step " << n + 1 << ", " << describe_node(grid, node)
         << ": " << top << " > " << strike;
      throw InvariantViolation("bounded_by_K", n + 1, node, top - strike, os.str());
    }

    double ratio = std::numeric_limits<double>::quiet_NaN();
    if (n >= 1 && deltas.back() > kRatioFloor) {
      ratio = delta / deltas.back();
      max_ratio = std::max(max_ratio, ratio);
      if (delta > c * deltas.back() + kContractionSlack) ++contraction_violations;
    }
    deltas.push_back(delta);
    ratios.push_back(ratio);
    min_increments.push_back(min_inc);
    max_values.push_back(top);

    std::vector<bool> next_mask = exercise_mask(next, g, cfg.tol_eq);
    for (std::size_t j = 0; j < next_mask.size(); ++j) {
      if (next_mask[j] && !mask[j]) ++nesting_violations;
    }
    mask = std::move(next_mask);
    exercise_counts.push_back(count_true(mask));

    q.swap(next);
    ++steps;
    if (options.record_iterates) iterates.push_back(engine.wrap(q));
    if (options.record_masks) masks.push_back(mask);
    if (stopping_rule(c, cfg.eps, delta)) {
      converged = true;
      if (!options.fixed_steps) break;
    }
  }
  if (options.fixed_steps) converged = !deltas.empty() && stopping_rule(c, cfg.eps, deltas.back());

  engine.step(q, next, &averaged);
  record_membership(steps);
  const double residual = sup_diff(next, q);
  const double tail_bound = deltas.empty() ? 0.0 : deltas.back() * c / (1.0 - c);

  GridFunction value = engine.wrap(std::move(q));
  std::optional<double> price;
  if (options.x0) price = evaluate(value, *options.x0);

  return IterationReport{
      .region = region,
      .discount = c,
      .n_stop = steps,
      .converged = converged,
      .deltas = std::move(deltas),
      .ratios = std::move(ratios),
      .min_increments = std::move(min_increments),
      .max_values = std::move(max_values),
      .exercise_counts = std::move(exercise_counts),
      .in_q = std::move(in_q),
      .first_q_failure = std::move(first_q_failure),
      .nesting_violations = nesting_violations,
      .contraction_violations = contraction_violations,
      .max_ratio = max_ratio,
      .residual = residual,
      .tail_bound = tail_bound,
      .price_at_x0 = price,
      .value = std::move(value),
      .iterates = std::move(iterates),
      .masks = std::move(masks),
  };
}

SmallestFixedPointReport verify_smallest(const PricingConfig& cfg, const CubatureRule& rule,
                                         const BasketPut& put, const LogPriceGrid& region,
                                         const IterationReport& up) {
  require_compatible(rule, put, region.dim());
  require_martingale(rule);
  const LogPriceGrid grid = pad_grid(region, rule, cfg.pad_factor);
  if (!(grid == up.value.grid())) {
    throw Error(ErrorCode::grid_mismatch, "verify_smallest: upward run used a different grid");
  }
  const BellmanEngine engine(cfg, rule, put, grid);
  const double c = cfg.discount();

  std::vector<double> q = engine.seed_cap();
  std::vector<double> next(q.size());
  std::size_t steps = 0;
  bool converged = false;
  while (steps < cfg.max_iters) {
    engine.step(q, next);
    double delta = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double dec = q[j] - next[j];
      if (dec < -kMonotoneTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "verify_smallest: descending iterate increased at step " << steps + 1 << ", "
           << describe_node(grid, j) << " by " << -dec;
        throw InvariantViolation("descending", steps + 1, j, -dec, os.str());
      }
      delta = std::max(delta, std::abs(dec));
    }
    q.swap(next);
    ++steps;
    if (stopping_rule(c, cfg.eps, delta)) {
      converged = true;
      break;
    }
  }
  engine.step(q, next);
  const double residual_down = sup_diff(next, q);

  const auto up_values = up.value.values();
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < q.size(); ++j) min_gap = std::min(min_gap, q[j] - up_values[j]);

  return SmallestFixedPointReport{
      .min_gap = min_gap,
      .residual_up = up.residual,
      .residual_down = residual_down,
      .n_stop_down = steps,
      .converged_down = converged,
      .down = engine.wrap(std::move(q)),
  };
}

SmallestFixedPointReport verify_smallest(const PricingConfig& cfg, const CubatureRule& rule,
                                         const BasketPut& put, const LogPriceGrid& region) {
  return verify_smallest(cfg, rule, put, region, iterate(cfg, rule, put, region));
}

}  // namespace bermudan
