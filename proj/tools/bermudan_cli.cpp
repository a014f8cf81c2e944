// Command-line front end. Links only the C interface.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "bermudan/bermudan.h"

namespace {

// Exit codes: 0 success, 1 bad input or runtime error, 2 price did not
// converge, 3 a diagnostic or oracle check failed.
int exit_code(bm_status status) {
  switch (status) {
    case BM_OK: return 0;
    case BM_NOT_CONVERGED: return 2;
    case BM_CHECK_FAILED: return 3;
    default: return 1;
  }
}

void report_error(bm_status status) {
  std::fprintf(stderr, "error (%s): %s\n", bm_status_name(status), bm_last_error());
}

class ConfigHandle {
 public:
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  ~ConfigHandle() { bm_config_free(config_); }

  bm_status load(const std::string& path) { return bm_config_load(path.c_str(), &config_); }
  [[nodiscard]] const bm_config* get() const { return config_; }

 private:
  bm_config* config_ = nullptr;
};

struct CommonFlags {
  std::string config;
  std::string out_dir;
  unsigned threads = 1;
  bool quiet = false;

  [[nodiscard]] bm_run_options options() const {
    bm_run_options o{};
    o.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
    o.threads = threads;
    o.verbose = quiet ? 0 : 1;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON run description")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", flags.out_dir, "Directory for report files (default: output.dir or .)");
  cmd->add_option("--threads", flags.threads, "Worker threads for the node sweep")->check(CLI::PositiveNumber);
  cmd->add_flag("-q,--quiet", flags.quiet, "Suppress progress lines");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perpetual Bermudan basket-put pricing by cubature value iteration"};
  app.require_subcommand(1);

  CommonFlags price_flags, diagnose_flags, oracle_flags;
  std::size_t steps = 5;
  std::size_t samples = 9;

  auto* price = app.add_subcommand("price", "Iterate to the fixed point and report the price at x0");
  add_common(price, price_flags);
  auto* diagnose = app.add_subcommand("diagnose", "Run the convergence and fixed-point checks");
  add_common(diagnose, diagnose_flags);
  auto* oracle = app.add_subcommand("oracle-check", "Compare q_n on the grid with the cubature tree");
  add_common(oracle, oracle_flags);
  oracle->add_option("--steps", steps, "Number of Bellman steps n")->required();
  oracle->add_option("--samples", samples, "Number of sample points on the region diagonal")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const CommonFlags& flags = price->parsed() ? price_flags : diagnose->parsed() ? diagnose_flags : oracle_flags;
  ConfigHandle config;
  if (bm_status s = config.load(flags.config); s != BM_OK) {
    report_error(s);
    return 1;
  }
  const bm_run_options options = flags.options();

  bm_status status = BM_OK;
  if (price->parsed()) {
    bm_price_summary summary{};
    status = bm_price(config.get(), &options, &summary);
    if (status == BM_OK || status == BM_NOT_CONVERGED) {
      std::printf("price %.17g\nn_stop %zu\nresidual %.17g\ntail_bound %.17g\nconverged %s\n", summary.price,
                  summary.n_stop, summary.residual, summary.tail_bound, summary.converged ? "true" : "false");
    }
  } else if (diagnose->parsed()) {
    bm_diagnose_summary summary{};
    status = bm_diagnose(config.get(), &options, &summary);
    if (status == BM_OK || status == BM_CHECK_FAILED) {
      std::printf("all_pass %s\npadding_sensitivity %.17g\n", summary.all_pass ? "true" : "false",
                  summary.padding_sensitivity);
    }
  } else {
    bm_oracle_summary summary{};
    status = bm_oracle_check(config.get(), steps, samples, &options, &summary);
    if (status == BM_OK || status == BM_CHECK_FAILED) {
      std::printf("max_discrepancy %.17g\nbudget %.17g\nwithin_budget %s\n", summary.max_discrepancy,
                  summary.budget, summary.within_budget ? "true" : "false");
    }
  }
  if (status != BM_OK && status != BM_NOT_CONVERGED && status != BM_CHECK_FAILED) report_error(status);
  return exit_code(status);
}
