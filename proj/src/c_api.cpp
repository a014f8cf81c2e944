#include "bermudan/bermudan.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <iostream>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "bermudan/commands.hpp"
#include "bermudan/config.hpp"
#include "bermudan/cubature.hpp"
#include "bermudan/error.hpp"
#include "bermudan/oracle.hpp"
#include "bermudan/payoff.hpp"

struct bm_config {
  bermudan::RunConfig value;
};

struct bm_rule {
  bermudan::CubatureRule value;
};

namespace {

thread_local std::string last_error;

bm_status to_status(bermudan::ErrorCode code) {
  using bermudan::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return BM_ERR_INVALID_ARGUMENT;
    case ErrorCode::not_positive_definite: return BM_ERR_NOT_POSITIVE_DEFINITE;
    case ErrorCode::overflow: return BM_ERR_OVERFLOW;
    case ErrorCode::non_finite: return BM_ERR_NON_FINITE;
    case ErrorCode::invariant_violation: return BM_ERR_INVARIANT;
    case ErrorCode::grid_mismatch: return BM_ERR_GRID_MISMATCH;
    case ErrorCode::depth_exceeded: return BM_ERR_DEPTH;
    case ErrorCode::config: return BM_ERR_CONFIG;
    case ErrorCode::io: return BM_ERR_IO;
  }
  return BM_ERR_INTERNAL;
}

template <class Fn>
bm_status guard(Fn&& fn) noexcept {
  try {
    last_error.clear();
    return fn();
  } catch (const bermudan::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return BM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return BM_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return BM_ERR_INTERNAL;
  }
}

bm_status null_argument(const char* what) {
  last_error = std::string(what) + " must not be NULL";
  return BM_ERR_INVALID_ARGUMENT;
}

bermudan::RunOptions run_options(const bm_run_options* options) {
  bermudan::RunOptions out;
  if (!options) return out;
  if (options->out_dir) out.out_dir = options->out_dir;
  if (options->threads > 0) out.threads = options->threads;
  if (options->verbose) out.log = &std::cerr;
  return out;
}

}  // namespace

extern "C" {

const char* bm_last_error(void) { return last_error.c_str(); }

const char* bm_status_name(bm_status status) {
  switch (status) {
    case BM_OK: return "ok";
    case BM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BM_ERR_NOT_POSITIVE_DEFINITE: return "not positive definite";
    case BM_ERR_OVERFLOW: return "overflow";
    case BM_ERR_NON_FINITE: return "non-finite value";
    case BM_ERR_INVARIANT: return "invariant violation";
    case BM_ERR_GRID_MISMATCH: return "grid mismatch";
    case BM_ERR_DEPTH: return "depth exceeded";
    case BM_ERR_CONFIG: return "config error";
    case BM_ERR_IO: return "i/o error";
    case BM_ERR_INTERNAL: return "internal error";
    case BM_NOT_CONVERGED: return "not converged";
    case BM_CHECK_FAILED: return "check failed";
  }
  return "unknown status";
}

bm_status bm_config_load(const char* path, bm_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guard([&] {
    *out = new bm_config{bermudan::load_run_config(path)};
    return BM_OK;
  });
}

bm_status bm_config_parse(const char* json_text, bm_config** out) {
  if (!json_text) return null_argument("json_text");
  if (!out) return null_argument("out");
  return guard([&] {
    *out = new bm_config{bermudan::parse_run_config(json_text)};
    return BM_OK;
  });
}

void bm_config_free(bm_config* config) { delete config; }

size_t bm_config_dim(const bm_config* config) { return config ? config->value.payoff.dim() : 0; }

double bm_config_discount(const bm_config* config) {
  return config ? config->value.pricing.discount() : 0.0;
}

bm_status bm_price(const bm_config* config, const bm_run_options* options, bm_price_summary* out) {
  if (!config) return null_argument("config");
  return guard([&] {
    const auto result = bermudan::run_price(config->value, run_options(options));
    if (out) {
      out->price = result.price;
      out->residual = result.report.residual;
      out->tail_bound = result.report.tail_bound;
      out->discount = result.report.discount;
      out->max_condition3_residual = result.rule.residuals.max();
      out->n_stop = result.report.n_stop;
      out->converged = result.report.converged ? 1 : 0;
    }
    return result.report.converged ? BM_OK : BM_NOT_CONVERGED;
  });
}

bm_status bm_diagnose(const bm_config* config, const bm_run_options* options,
                      bm_diagnose_summary* out) {
  if (!config) return null_argument("config");
  return guard([&] {
    const auto result = bermudan::run_diagnose(config->value, run_options(options));
    if (out) {
      *out = bm_diagnose_summary{};
      out->all_pass = result.all_pass ? 1 : 0;
      out->padding_sensitivity = result.padding_sensitivity;
      for (const auto& check : result.checks) {
        const int pass = check.pass ? 1 : 0;
        if (check.name == "monotone") out->monotone = pass;
        else if (check.name == "bounded_by_K") out->bounded_by_k = pass;
        else if (check.name == "contraction") out->contraction = pass;
        else if (check.name == "nesting") out->nesting = pass;
        else if (check.name == "Q_membership") out->q_membership = pass;
        else if (check.name == "smallest_ordering") out->smallest_ordering = pass;
      }
    }
    return result.all_pass ? BM_OK : BM_CHECK_FAILED;
  });
}

bm_status bm_oracle_check(const bm_config* config, size_t steps, size_t samples,
                          const bm_run_options* options, bm_oracle_summary* out) {
  if (!config) return null_argument("config");
  return guard([&] {
    const auto result = bermudan::run_oracle_check(config->value, steps, samples, run_options(options));
    if (out) {
      out->max_discrepancy = result.comparison.max_discrepancy;
      out->budget = result.budget;
      out->within_budget = result.within_budget ? 1 : 0;
    }
    return result.within_budget ? BM_OK : BM_CHECK_FAILED;
  });
}

bm_status bm_rule_create(size_t dim, size_t size, const double* weights, const double* points,
                         bm_rule** out) {
  if (!weights) return null_argument("weights");
  if (!points) return null_argument("points");
  if (!out) return null_argument("out");
  return guard([&] {
    std::vector<double> w(weights, weights + size);
    std::vector<double> p(points, points + size * dim);
    *out = new bm_rule{bermudan::CubatureRule(dim, std::move(w), std::move(p))};
    return BM_OK;
  });
}

bm_status bm_rule_gauss_hermite(size_t dim, size_t points_per_axis, const double* sigma, double t,
                                const double* correlation, bm_rule** out) {
  if (!sigma) return null_argument("sigma");
  if (!out) return null_argument("out");
  return guard([&] {
    bermudan::RuleSpec spec;
    spec.points_per_axis = points_per_axis;
    spec.sigma.assign(sigma, sigma + dim);
    spec.t = t;
    if (correlation) spec.correlation = std::vector<double>(correlation, correlation + dim * dim);
    *out = new bm_rule{bermudan::build_gauss_hermite(spec)};
    return BM_OK;
  });
}

bm_status bm_rule_from_json(const char* json_text, bm_rule** out) {
  if (!json_text) return null_argument("json_text");
  if (!out) return null_argument("out");
  return guard([&] {
    *out = new bm_rule{bermudan::rule_from_json(json_text)};
    return BM_OK;
  });
}

bm_status bm_rule_to_json(const bm_rule* rule, char* buffer, size_t capacity, size_t* required) {
  if (!rule) return null_argument("rule");
  return guard([&] {
    const std::string text = bermudan::rule_to_json(rule->value);
    if (required) *required = text.size() + 1;
    if (buffer && capacity > 0) {
      const size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
      if (n < text.size()) {
        last_error = "buffer too small for rule JSON";
        return BM_ERR_INVALID_ARGUMENT;
      }
    }
    return BM_OK;
  });
}

void bm_rule_free(bm_rule* rule) { delete rule; }

size_t bm_rule_dim(const bm_rule* rule) { return rule ? rule->value.dim() : 0; }

size_t bm_rule_size(const bm_rule* rule) { return rule ? rule->value.size() : 0; }

bm_status bm_rule_weights(const bm_rule* rule, double* out, size_t capacity) {
  if (!rule) return null_argument("rule");
  if (!out) return null_argument("out");
  const auto w = rule->value.weights();
  if (capacity < w.size()) {
    last_error = "capacity smaller than the rule size";
    return BM_ERR_INVALID_ARGUMENT;
  }
  std::copy(w.begin(), w.end(), out);
  return BM_OK;
}

bm_status bm_rule_points(const bm_rule* rule, double* out, size_t capacity) {
  if (!rule) return null_argument("rule");
  if (!out) return null_argument("out");
  const auto p = rule->value.points();
  if (capacity < p.size()) {
    last_error = "capacity smaller than size * dim";
    return BM_ERR_INVALID_ARGUMENT;
  }
  std::copy(p.begin(), p.end(), out);
  return BM_OK;
}

bm_status bm_rule_drift_adjust(const bm_rule* rule, bm_rule** out, double* shift) {
  if (!rule) return null_argument("rule");
  if (!out) return null_argument("out");
  return guard([&] {
    auto adjusted = bermudan::drift_adjust_with_shift(rule->value);
    if (shift) std::copy(adjusted.shift.begin(), adjusted.shift.end(), shift);
    *out = new bm_rule{std::move(adjusted.rule)};
    return BM_OK;
  });
}

bm_status bm_rule_condition3(const bm_rule* rule, double tol, double* residuals, int* pass) {
  if (!rule) return null_argument("rule");
  return guard([&] {
    const auto report = bermudan::validate_condition3(rule->value, tol);
    if (residuals) std::copy(report.residuals.begin(), report.residuals.end(), residuals);
    if (pass) *pass = report.pass ? 1 : 0;
    return BM_OK;
  });
}

bm_status bm_payoff(double strike, const double* basket_weights, size_t dim, const double* x,
                    double* payoff, double* payoff_plus) {
  if (!basket_weights) return null_argument("basket_weights");
  if (!x) return null_argument("x");
  return guard([&] {
    const bermudan::BasketPut put(strike, std::vector<double>(basket_weights, basket_weights + dim));
    const std::span<const double> point(x, dim);
    if (payoff) *payoff = put.payoff(point);
    if (payoff_plus) *payoff_plus = put.payoff_plus(point);
    return BM_OK;
  });
}

bm_status bm_tree_price(const bm_rule* rule, double strike, const double* basket_weights,
                        double rate, double interval, const double* x0, size_t depth, double* out) {
  if (!rule) return null_argument("rule");
  if (!basket_weights) return null_argument("basket_weights");
  if (!x0) return null_argument("x0");
  if (!out) return null_argument("out");
  return guard([&] {
    const size_t d = rule->value.dim();
    const bermudan::BasketPut put(strike, std::vector<double>(basket_weights, basket_weights + d));
    const bermudan::PricingConfig cfg(rate, interval);
    bermudan::TreeQuery query;
    query.x0.assign(x0, x0 + d);
    query.depth = depth;
    *out = bermudan::tree_price(rule->value, put, cfg, query);
    return BM_OK;
  });
}

int bm_stopping_rule(double discount, double eps, double delta) {
  return bermudan::stopping_rule(discount, eps, delta) ? 1 : 0;
}

}  // extern "C"
