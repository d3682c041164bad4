// heatchain: command-line front end for the stochastic energy-exchange
// simulator. See README.md for the subcommands and the config schema.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatchain/errors.hpp"
#include "heatchain/experiment.hpp"
#include "heatchain/validation.hpp"

namespace {

int report_error(const char* kind, int code, const std::string& message) {
  nlohmann::ordered_json record = {
      {"error", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << record.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace heatchain;

  CLI::App app{"Stochastic energy-exchange chains: simulation and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  const char* experiments[] = {"conductivity-1d", "conductivity-2d",
                               "marginals", "profile", "independence"};
  const char* descriptions[] = {
      "Conductance q for each chain length in sweep.N",
      "Conductance q for each width in sweep.M at fixed N",
      "Per-site Gamma fits and goodness-of-fit reports",
      "Empirical mean-energy profile against the constant-flux prediction",
      "Independence chi-square of the two central sites per N"};
  for (int i = 0; i < 5; ++i) {
    auto* sub = app.add_subcommand(experiments[i], descriptions[i]);
    sub->add_option("-c,--config", config_path, "JSON experiment config")
        ->required();
    sub->add_option("--threads", threads, "Worker threads (default: all)");
    sub->add_option("--seed", seed, "Override run.seed");
    sub->add_option("--out", out_dir, "Override output.directory");
  }

  ValidationOptions vopts;
  auto* validate = app.add_subcommand("validate", "Run the oracle checks");
  validate->add_option("--seed", seed, "Override the validation seed");
  validate->add_option("--out", out_dir, "Directory for validate.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", 2, e.what());
  }

  try {
    if (validate->parsed()) {
      if (seed) vopts.seed = *seed;
      const auto results = run_validation_suite(vopts);
      bool ok = true;
      for (const auto& r : results) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " value="
                  << format_double(r.value) << " limit=" << format_double(r.limit)
                  << " (" << r.detail << ")\n";
        ok = ok && r.pass;
      }
      const std::filesystem::path dir = out_dir.value_or(".");
      std::filesystem::create_directories(dir);
      std::ofstream(dir / "validate.csv", std::ios::binary)
          << validation_csv(results);
      if (!ok) return report_error("analysis", 4, "validation checks failed");
      return 0;
    }

    for (const char* name : experiments) {
      auto* sub = app.get_subcommand(name);
      if (!sub->parsed()) continue;
      ExperimentConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (out_dir) cfg.out_dir = *out_dir;
      const auto written = run_experiment(name, cfg, RunOptions{threads}, std::cerr);
      for (const auto& p : written) std::cout << p.string() << '\n';
    }
    return 0;
  } catch (const ConfigError& e) {
    return report_error("config", 2, e.what());
  } catch (const DomainError& e) {
    return report_error("config", 2, e.what());
  } catch (const DeadlockError& e) {
    return report_error("deadlock", 3, e.what());
  } catch (const AnalysisError& e) {
    return report_error("analysis", 4, e.what());
  } catch (const ObserverError& e) {
    return report_error("analysis", 4, e.what());
  } catch (const std::exception& e) {
    return report_error("internal", 1, e.what());
  }
}
