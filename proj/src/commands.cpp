#include "bermudan/commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bermudan/error.hpp"
#include "detail.hpp"

namespace bermudan {

namespace {

using ordered_json = nlohmann::ordered_json;

std::filesystem::path output_dir(const RunConfig& config, const RunOptions& options) {
  std::filesystem::path dir = options.out_dir.value_or(std::filesystem::path(config.out_dir));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::io, "cannot write " + path.string());
  return os;
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
  if (!os) throw Error(ErrorCode::io, "failed writing " + path.string());
}

PricingConfig effective_pricing(const RunConfig& config, const RunOptions& options) {
  PricingConfig cfg = config.pricing;
  cfg.threads = options.threads.value_or(1);
  if (cfg.threads == 0) cfg.threads = 1;
  return cfg;
}

ordered_json node_failure_json(const NodeFailure& f) {
  ordered_json j;
  j["step"] = f.step;
  j["node"] = f.node;
  j["x"] = f.x;
  j["excess"] = f.excess;
  return j;
}

std::string fmt(double v) { return detail::format_double(v); }

}  // namespace

PreparedRule prepare_rule(const RunConfig& config, std::ostream* log) {
  DriftAdjustment adjusted = drift_adjust_with_shift(base_rule(config));
  MartingaleResiduals residuals = validate_condition3(adjusted.rule, kCondition3Tolerance);
  if (log) {
    *log << "drift_adjust: delta = [";
    for (std::size_t i = 0; i < adjusted.shift.size(); ++i) {
      *log << (i ? ", " : "") << fmt(adjusted.shift[i]);
    }
    *log << "], max condition residual = " << fmt(residuals.max()) << '\n';
  }
  return PreparedRule{std::move(adjusted.rule), std::move(adjusted.shift), std::move(residuals)};
}

void write_iterations_csv(const IterationReport& report, std::ostream& os) {
  os << "n,delta,ratio,c,exercise_count\n";
  for (std::size_t n = 0; n < report.deltas.size(); ++n) {
    os << n << ',' << fmt(report.deltas[n]) << ',';
    if (!std::isnan(report.ratios[n])) os << fmt(report.ratios[n]);
    os << ',' << fmt(report.discount) << ',' << report.exercise_counts[n] << '\n';
  }
}

PriceOutcome run_price(const RunConfig& config, const RunOptions& options) {
  const auto dir = output_dir(config, options);
  PreparedRule prepared = prepare_rule(config, options.log);
  const PricingConfig cfg = effective_pricing(config, options);

  IterateOptions iopts;
  iopts.x0 = config.x0;
  IterationReport report = iterate(cfg, prepared.rule, config.payoff, config.grid, iopts);
  const double price = *report.price_at_x0;

  {
    auto os = open_output(dir / "iterations.csv");
    write_iterations_csv(report, os);
  }
  {
    auto os = open_output(dir / "values.csv");
    write_values_csv(report.value, os);
  }
  ordered_json summary;
  summary["price"] = price;
  summary["x0"] = config.x0;
  summary["residual"] = report.residual;
  summary["tail_bound"] = report.tail_bound;
  summary["n_stop"] = report.n_stop;
  summary["converged"] = report.converged;
  summary["c"] = report.discount;
  summary["condition3_residuals"] = prepared.residuals.residuals;
  summary["drift_delta"] = prepared.shift;
  write_json(dir / "summary.json", summary);

  if (options.log) {
    *options.log << "price = " << fmt(price) << " after " << report.n_stop << " steps"
                 << (report.converged ? "" : " (not converged)") << '\n';
  }
  return PriceOutcome{std::move(prepared), std::move(report), price};
}

DiagnoseOutcome run_diagnose(const RunConfig& config, const RunOptions& options) {
  const auto dir = output_dir(config, options);
  const PreparedRule prepared = prepare_rule(config, options.log);
  const PricingConfig cfg = effective_pricing(config, options);
  const double c = cfg.discount();

  DiagnoseOutcome out;
  ordered_json checks;
  auto add = [&](const std::string& name, bool pass, ordered_json detail) {
    detail["pass"] = pass;
    checks[name] = std::move(detail);
    out.checks.push_back(CheckResult{name, pass, checks[name].dump()});
  };

  IterateOptions iopts;
  iopts.x0 = config.x0;
  std::optional<IterationReport> up;
  try {
    up = iterate(cfg, prepared.rule, config.payoff, config.grid, iopts);
  } catch (const InvariantViolation& e) {
    const LogPriceGrid grid = pad_grid(config.grid, prepared.rule, cfg.pad_factor);
    ordered_json failure;
    failure["step"] = e.step();
    failure["node"] = e.node();
    failure["x"] = grid.node_point(e.node());
    failure["excess"] = e.excess();
    failure["message"] = e.what();
    for (const char* name : {"monotone", "bounded_by_K"}) {
      ordered_json d;
      if (e.invariant() == name) d["failure"] = failure;
      else d["evaluated"] = false;
      add(name, false, std::move(d));
    }
    for (const char* name : {"contraction", "nesting", "Q_membership", "smallest_ordering"}) {
      ordered_json d;
      d["evaluated"] = false;
      add(name, false, std::move(d));
    }
  }

  if (up) {
    double min_inc = std::numeric_limits<double>::infinity();
    for (double v : up->min_increments) min_inc = std::min(min_inc, v);
    double max_val = 0.0;
    for (double v : up->max_values) max_val = std::max(max_val, v);
    {
      ordered_json d;
      d["min_increment"] = up->min_increments.empty() ? 0.0 : min_inc;
      add("monotone", up->min_increments.empty() || min_inc >= -kMonotoneTolerance, std::move(d));
    }
    {
      ordered_json d;
      d["max_value"] = max_val;
      d["K"] = config.payoff.strike();
      add("bounded_by_K", max_val <= config.payoff.strike() + kCapTolerance, std::move(d));
    }
    {
      ordered_json d;
      d["c"] = c;
      d["max_ratio"] = up->max_ratio;
      d["violations"] = up->contraction_violations;
      add("contraction", up->contraction_violations == 0, std::move(d));
    }
    {
      ordered_json d;
      d["violations"] = up->nesting_violations;
      d["exercise_counts_first_last"] = {up->exercise_counts.front(), up->exercise_counts.back()};
      add("nesting", up->nesting_violations == 0, std::move(d));
    }
    {
      ordered_json d;
      d["iterates_checked"] = up->in_q.size();
      if (up->first_q_failure) d["failure"] = node_failure_json(*up->first_q_failure);
      add("Q_membership", !up->first_q_failure.has_value(), std::move(d));
    }
    try {
      const auto smallest = verify_smallest(cfg, prepared.rule, config.payoff, config.grid, *up);
      ordered_json d;
      d["min_gap"] = smallest.min_gap;
      d["residual_up"] = smallest.residual_up;
      d["residual_down"] = smallest.residual_down;
      d["n_stop_down"] = smallest.n_stop_down;
      add("smallest_ordering", smallest.min_gap >= -kMembershipTolerance, std::move(d));
    } catch (const InvariantViolation& e) {
      ordered_json d;
      d["failure"] = e.what();
      add("smallest_ordering", false, std::move(d));
    }

    PricingConfig doubled = cfg;
    doubled.pad_factor = 2.0 * cfg.pad_factor;
    IterationReport wide = iterate(doubled, prepared.rule, config.payoff, config.grid, iopts);
    out.padding_sensitivity = std::abs(*wide.price_at_x0 - *up->price_at_x0);
    ordered_json pad;
    pad["price"] = *up->price_at_x0;
    pad["price_doubled_padding"] = *wide.price_at_x0;
    pad["delta"] = out.padding_sensitivity;
    checks["padding_sensitivity"] = pad;
    checks["converged"] = up->converged;
  }

  out.all_pass = true;
  for (const auto& check : out.checks) out.all_pass = out.all_pass && check.pass;
  checks["all_pass"] = out.all_pass;
  write_json(dir / "checks.json", checks);
  if (options.log) {
    for (const auto& check : out.checks) {
      *options.log << (check.pass ? "PASS " : "FAIL ") << check.name << '\n';
    }
  }
  return out;
}

OracleOutcome run_oracle_check(const RunConfig& config, std::size_t steps, std::size_t samples,
                               const RunOptions& options) {
  const auto dir = output_dir(config, options);
  const PreparedRule prepared = prepare_rule(config, options.log);
  const PricingConfig cfg = effective_pricing(config, options);
  if (samples == 0) throw Error(ErrorCode::invalid_argument, "oracle-check: need at least one sample");

  const auto points = diagonal_samples(config.grid, samples);
  OracleComparison comparison = tree_vs_grid(prepared.rule, config.payoff, cfg, config.grid, steps, points);

  {
    auto os = open_output(dir / "oracle_check.csv");
    for (std::size_t i = 0; i < config.grid.dim(); ++i) os << "x_" << (i + 1) << ',';
    os << "grid_value,tree_value,abs_diff\n";
    for (const auto& row : comparison.rows) {
      for (double xi : row.x) os << fmt(xi) << ',';
      os << fmt(row.grid_value) << ',' << fmt(row.tree_value) << ',' << fmt(row.abs_diff) << '\n';
    }
  }
  const bool ok = comparison.max_discrepancy <= config.oracle_budget;
  ordered_json summary;
  summary["steps"] = steps;
  summary["samples"] = samples;
  summary["max_discrepancy"] = comparison.max_discrepancy;
  summary["budget"] = config.oracle_budget;
  summary["within_budget"] = ok;
  write_json(dir / "oracle_summary.json", summary);
  if (options.log) {
    *options.log << "max discrepancy = " << fmt(comparison.max_discrepancy) << " (budget "
                 << fmt(config.oracle_budget) << ")\n";
  }
  return OracleOutcome{std::move(comparison), config.oracle_budget, ok};
}

}  // namespace bermudan
