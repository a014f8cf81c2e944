#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bermudan/bellman.hpp"
#include "bermudan/config.hpp"
#include "bermudan/cubature.hpp"
#include "bermudan/oracle.hpp"

namespace bermudan {

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides output.dir
  std::optional<unsigned> threads;               // overrides the default of 1
  std::ostream* log = nullptr;                   // progress lines, e.g. the drift shift
};

struct PreparedRule {
  CubatureRule rule;           // drift-adjusted
  std::vector<double> shift;   // delta applied per coordinate
  MartingaleResiduals residuals;
};

/// Builds the configured rule and always applies drift_adjust.
[[nodiscard]] PreparedRule prepare_rule(const RunConfig& config, std::ostream* log = nullptr);

struct PriceOutcome {
  PreparedRule rule;
  IterationReport report;
  double price = 0.0;
};

// Files: summary.json, iterations.csv, values.csv.
[[nodiscard]] PriceOutcome run_price(const RunConfig& config, const RunOptions& options);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct DiagnoseOutcome {
  std::vector<CheckResult> checks;
  double padding_sensitivity = 0.0;
  bool all_pass = false;
};

// File: checks.json.
[[nodiscard]] DiagnoseOutcome run_diagnose(const RunConfig& config, const RunOptions& options);

struct OracleOutcome {
  OracleComparison comparison;
  double budget = 0.0;
  bool within_budget = false;
};

// Files: oracle_check.csv, oracle_summary.json.
[[nodiscard]] OracleOutcome run_oracle_check(const RunConfig& config, std::size_t steps,
                                             std::size_t samples, const RunOptions& options);

void write_iterations_csv(const IterationReport& report, std::ostream& os);

}  // namespace bermudan
