#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bermudan/bellman.hpp"
#include "bermudan/cubature.hpp"
#include "bermudan/grid.hpp"
#include "bermudan/payoff.hpp"

namespace bermudan {

// A fully validated run description. Dimensions of every field agree.
struct RunConfig {
  BasketPut payoff;
  std::variant<RuleSpec, CubatureRule> rule;
  PricingConfig pricing;
  LogPriceGrid grid;  // region of interest, before padding
  std::vector<double> x0;
  double oracle_budget = 0.0;  // absolute; defaults to 5e-3 * K
  std::string out_dir = ".";
  std::string source = "<config>";
};

/// Parses the JSON run description. Every failure is an Error with
/// ErrorCode::config whose message starts with "<source>:<line>:".
[[nodiscard]] RunConfig parse_run_config(std::string_view text, std::string source = "<config>");
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// The rule as written in the config (Gauss-Hermite or explicit), before
/// drift adjustment.
[[nodiscard]] CubatureRule base_rule(const RunConfig& config);

/// {"dim", "weights": [...], "points": [[...], ...]}
[[nodiscard]] std::string rule_to_json(const CubatureRule& rule);
[[nodiscard]] CubatureRule rule_from_json(std::string_view text);

}  // namespace bermudan
