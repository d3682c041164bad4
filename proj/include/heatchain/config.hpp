#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatchain/model.hpp"

namespace heatchain {

/// One experiment, as read from a JSON document:
///
///   {
///     "model":    {"rate_kind": "sum-sqrt", "cap": null},
///     "topology": {"kind": "chain", "N": 40, "M": 1},
///     "baths":    {"T_left": 1.0, "T_right": 2.0},
///     "run":      {"T_end": 2e5, "burn_in": 2e4, "seed": 7, "trajectories": 1},
///     "sampling": {"h": 2.0, "sites": [20, 21], "max_samples": 1000000},
///     "output":   {"directory": "out", "prefix": "run1_"},
///     "sweep":    {"N": [6, 10, 14], "M": [1, 2, 4]},
///     "analysis": {"anchors": [5, 36]}
///   }
///
/// Site indices in `sampling.sites` and `analysis.anchors` are 1-based,
/// column indices along the chain. Unknown keys are rejected.
struct ExperimentConfig {
  RateKind rate_kind = RateKind::SumSqrt;
  std::optional<double> cap;

  TopologyKind topology = TopologyKind::Chain1D;
  std::size_t N = 0;
  std::size_t M = 1;

  double T_left = 1.0;
  double T_right = 2.0;

  double t_end = 0.0;
  double burn_in = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t trajectories = 1;

  std::optional<double> h;
  std::vector<std::size_t> sites;
  std::optional<std::uint64_t> max_samples;

  std::filesystem::path out_dir = ".";
  std::string prefix;

  std::vector<std::size_t> sweep_N;
  std::vector<std::size_t> sweep_M;

  std::optional<std::array<std::size_t, 2>> anchors;

  RateSpec rate_spec() const { return RateSpec(rate_kind, cap); }
  BathSpec bath_spec() const { return BathSpec(T_left, T_right); }
  /// sweep_N if given, else {N}.
  std::vector<std::size_t> chain_lengths() const;
  /// sweep_M if given, else {M}.
  std::vector<std::size_t> widths() const;
};

/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace heatchain
