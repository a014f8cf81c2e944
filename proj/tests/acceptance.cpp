// Exit gate: one PASS/FAIL line per acceptance criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bermudan/bellman.hpp"
#include "bermudan/cubature.hpp"
#include "bermudan/error.hpp"
#include "bermudan/oracle.hpp"
#include "support.hpp"

using namespace bermudan;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// The 20 randomized configurations shared by criteria 1-4.
struct RandomRun {
  testing::Scenario scenario;
  std::optional<IterationReport> report;
  std::string failure;
};

std::vector<RandomRun> random_runs(double& elapsed) {
  std::mt19937_64 rng(20240611);
  std::vector<RandomRun> runs;
  const auto start = Clock::now();
  for (int i = 0; i < 20; ++i) {
    const std::size_t d = 1 + static_cast<std::size_t>(i % 3);
    const std::size_t m = 1 + static_cast<std::size_t>((i / 3) % 3);
    RandomRun run{testing::random_scenario(rng, d, m, i % 2 == 1), std::nullopt, {}};
    IterateOptions opts;
    opts.record_masks = true;
    opts.x0 = run.scenario.x0;
    try {
      run.report = iterate(run.scenario.cfg, run.scenario.rule, run.scenario.put, run.scenario.region, opts);
    } catch (const InvariantViolation& e) {
      run.failure = e.what();
    }
    runs.push_back(std::move(run));
  }
  elapsed = seconds_since(start);
  return runs;
}

Outcome criterion_monotone(const std::vector<RandomRun>& runs, double elapsed) {
  Outcome out;
  double worst_inc = 0.0, worst_cap = -1e300;
  for (const auto& run : runs) {
    if (!run.report) {
      out.pass = false;
      out.detail = run.failure;
      return out;
    }
    for (double v : run.report->min_increments) worst_inc = std::min(worst_inc, v);
    for (double v : run.report->max_values) worst_cap = std::max(worst_cap, v - run.scenario.put.strike());
  }
  out.pass = worst_inc >= -1e-12 && worst_cap <= 1e-12 && elapsed < 60.0;
  out.detail = fmt("min increment %.3g, max(q - K) %.3g, %.1f s", worst_inc, worst_cap, elapsed);
  return out;
}

Outcome criterion_contraction(const std::vector<RandomRun>& runs) {
  Outcome out;
  std::size_t violations = 0;
  std::string ratios;
  for (const auto& run : runs) {
    if (!run.report) return {false, "run aborted: " + run.failure};
    const auto& deltas = run.report->deltas;
    const double c = run.report->discount;
    for (std::size_t n = 1; n < deltas.size(); ++n) {
      if (deltas[n - 1] > 1e-14 && deltas[n] > c * deltas[n - 1] + 1e-10) ++violations;
    }
    ratios += fmt(" %.4f/%.4f", run.report->max_ratio, c);
  }
  out.pass = violations == 0;
  out.detail = std::to_string(violations) + " violations; max ratio/c:" + ratios;
  return out;
}

Outcome criterion_nesting(const std::vector<RandomRun>& runs) {
  std::size_t violations = 0, steps = 0;
  for (const auto& run : runs) {
    if (!run.report) return {false, "run aborted: " + run.failure};
    const auto& masks = run.report->masks;
    for (std::size_t n = 1; n < masks.size(); ++n, ++steps) {
      for (std::size_t j = 0; j < masks[n].size(); ++j) {
        if (masks[n][j] && !masks[n - 1][j]) ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(steps) + " steps"};
}

Outcome criterion_identities(const std::vector<RandomRun>& runs) {
  std::mt19937_64 rng(7);
  double worst_c3 = 0.0, worst_g = 0.0, worst_h = 0.0;
  bool pass = true;
  for (const auto& run : runs) {
    const auto& sc = run.scenario;
    const double K = sc.put.strike();
    const auto residuals = validate_condition3(sc.rule, kCondition3Tolerance);
    worst_c3 = std::max(worst_c3, residuals.max());
    pass = pass && residuals.pass && residuals.max() <= 1e-10;

    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::vector<double> x(sc.dim), y(sc.dim);
    double mass = 0.0;
    for (double a : sc.rule.weights()) mass += a * K;
    const double gap_h = std::abs(mass - K) / K;
    worst_h = std::max(worst_h, gap_h);
    pass = pass && gap_h <= 1e-12;
    for (int s = 0; s < 100; ++s) {
      for (std::size_t i = 0; i < sc.dim; ++i) x[i] = std::log(K) + u(rng);
      double avg = 0.0;
      for (std::size_t k = 0; k < sc.rule.size(); ++k) {
        const auto xk = sc.rule.point(k);
        for (std::size_t i = 0; i < sc.dim; ++i) y[i] = x[i] - xk[i];
        avg += sc.rule.weights()[k] * sc.put.payoff(y);
      }
      const double gap_g = std::abs(avg - sc.put.payoff(x)) / K;
      worst_g = std::max(worst_g, gap_g);
      pass = pass && gap_g <= 1e-9;
    }
  }
  return {pass, fmt("martingale residual %.3g, |Ag - g|/K %.3g, |Ah - h|/K %.3g", worst_c3, worst_g, worst_h)};
}

Outcome criterion_oracle() {
  const auto start = Clock::now();
  RuleSpec spec;
  spec.points_per_axis = 3;
  spec.sigma = {0.2};
  spec.t = 1.0;
  const auto rule = drift_adjust(build_gauss_hermite(spec));
  const BasketPut put(1.0, {1.0});
  PricingConfig cfg(0.05, 1.0);
  cfg.pad_factor = 3.0;
  const LogPriceGrid coarse({-3.0}, {3.0}, {241});
  const LogPriceGrid fine({-3.0}, {3.0}, {481});
  const auto samples = diagonal_samples(coarse, 9);
  const auto a = tree_vs_grid(rule, put, cfg, coarse, 5, samples);
  const auto b = tree_vs_grid(rule, put, cfg, fine, 5, samples);
  const double elapsed = seconds_since(start);
  const bool pass = a.max_discrepancy <= 5e-3 * put.strike() && b.max_discrepancy < a.max_discrepancy && elapsed < 10.0;
  return {pass, fmt("241 nodes %.3g, 481 nodes %.3g, %.2f s", a.max_discrepancy, b.max_discrepancy, elapsed)};
}

Outcome criterion_fixed_point(const std::vector<RandomRun>& runs) {
  bool pass = true;
  std::string detail;
  std::size_t used = 0;
  for (const auto& run : runs) {
    if (used == 5) break;
    if (run.scenario.points_per_axis < 2 || !run.report || !run.report->converged) continue;
    const auto& sc = run.scenario;
    const auto& up = *run.report;
    const double last = up.deltas.back();
    const bool residual_ok = up.residual <= last + 1e-12;
    double gap = 0.0;
    try {
      gap = verify_smallest(sc.cfg, sc.rule, sc.put, sc.region, up).min_gap;
    } catch (const Error& e) {
      return {false, e.what()};
    }
    pass = pass && residual_ok && gap >= -1e-10;
    detail += fmt(" [residual %.2g <= %.2g, gap %.2g]", up.residual, last, gap);
    ++used;
  }
  if (used < 5) return {false, "fewer than 5 converged configs"};
  return {pass, "5 configs:" + detail};
}

Outcome criterion_stopping() {
  RuleSpec spec;
  spec.points_per_axis = 3;
  spec.sigma = {0.2};
  spec.t = 1.0;
  const auto rule = drift_adjust(build_gauss_hermite(spec));
  const BasketPut put(1.0, {1.0});
  PricingConfig cfg(std::log(2.0), 1.0);
  cfg.eps = 1e-4;
  const LogPriceGrid region({-3.0}, {3.0}, {241});
  const auto stopped = iterate(cfg, rule, put, region);
  if (!stopped.converged) return {false, "stopping rule never fired"};
  IterateOptions opts;
  opts.fixed_steps = stopped.n_stop + 10;
  const auto extended = iterate(cfg, rule, put, region, opts);
  const double gap = sup_distance(extended.value, stopped.value);
  const bool pass = gap <= cfg.eps;
  return {pass, fmt("c = %.3g, stopped after %.0f steps, 10 more move it by %.3g", cfg.discount(),
                    static_cast<double>(stopped.n_stop), gap)};
}

Outcome criterion_degenerate() {
  const PricingConfig cfg(0.05, 1.0);
  const CubatureRule identity(1, {1.0}, {0.0});
  const BasketPut put(1.0, {1.0});
  const auto one = iterate(cfg, identity, put, LogPriceGrid({-2.0}, {2.0}, {41}));
  double gap = 0.0;
  for (std::size_t j = 0; j < one.value.grid().size(); ++j) {
    gap = std::max(gap, std::abs(one.value.values()[j] - put.payoff_plus(one.value.grid().node_point(j))));
  }
  const bool one_ok = one.converged && one.n_stop <= 1 && gap == 0.0;

  RuleSpec spec;
  spec.points_per_axis = 3;
  spec.sigma = {0.2};
  const auto rule = drift_adjust(build_gauss_hermite(spec));
  const BasketPut deep(1e-3, {1.0});
  const auto otm = iterate(cfg, rule, deep, LogPriceGrid({0.0}, {2.0}, {41}));
  double top = 0.0;
  for (double v : otm.value.values()) top = std::max(top, std::abs(v));
  const bool otm_ok = otm.converged && otm.n_stop <= 1 && top == 0.0;
  return {one_ok && otm_ok, fmt("one-point: %.0f step(s), |q - g v 0| %.3g; out of the money: %.0f step(s)",
                                static_cast<double>(one.n_stop), gap, static_cast<double>(otm.n_stop)) +
                                fmt(", max |q| %.3g", top)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };

  double elapsed = 0.0;
  const auto runs = random_runs(elapsed);
  report(1, "monotone convergence", [&] { return criterion_monotone(runs, elapsed); });
  report(2, "contraction rate", [&] { return criterion_contraction(runs); });
  report(3, "exercise-region nesting", [&] { return criterion_nesting(runs); });
  report(4, "martingale identities", [&] { return criterion_identities(runs); });
  report(5, "oracle equivalence", criterion_oracle);
  report(6, "fixed-point certificate", [&] { return criterion_fixed_point(runs); });
  report(7, "stopping-rule soundness", criterion_stopping);
  report(8, "degenerate cases", criterion_degenerate);
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
