#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "heatchain/config.hpp"
#include "heatchain/observables.hpp"

namespace heatchain {

/// Runs job(i) for i in [0, count) on up to `threads` workers and returns
/// the results in index order, so the output never depends on which worker
/// finished first. The exception of the lowest failing index is rethrown.
template <typename Job>
auto run_ensemble(std::size_t count, unsigned threads, Job job)
    -> std::vector<decltype(job(std::size_t{}))> {
  using Result = decltype(job(std::size_t{}));
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(job(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(
                                      threads, static_cast<unsigned>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Result> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

unsigned default_threads();

/// Stream index of trajectory t of the (N, M) point of an experiment:
/// ((N << 16 | M) << 24) + t. A point's streams do not depend on which other
/// points share the sweep.
std::uint64_t trajectory_index(std::size_t N, std::size_t M, std::uint64_t t);

Topology experiment_topology(const ExperimentConfig& cfg, std::size_t N,
                             std::size_t M);
RunConfig make_run_config(const ExperimentConfig& cfg, const Topology& topo,
                          std::uint64_t trajectory);

// ---------------------------------------------------------------------------
// Conductivity
// ---------------------------------------------------------------------------

struct TrajectoryFlux {
  std::uint64_t trajectory;
  FluxLedger ledger;
  std::uint64_t events;
};

struct ConductivityPoint {
  ConductivityEstimate estimate;
  std::uint64_t events = 0;
  BondFluxProfile bonds;
};

TrajectoryFlux run_flux_trajectory(const ExperimentConfig& cfg,
                                   const Topology& topo,
                                   std::uint64_t trajectory);

/// Pools trajectories in ascending trajectory order, whatever order they
/// are given in.
ConductivityPoint reduce_conductivity(std::vector<TrajectoryFlux> parts,
                                      const BathSpec& baths,
                                      const Topology& topo, std::uint64_t seed);

/// One point per chain length (1D) or per width M at fixed N (2D).
std::vector<ConductivityPoint> conductivity_sweep(const ExperimentConfig& cfg,
                                                  bool over_widths,
                                                  unsigned threads);

// ---------------------------------------------------------------------------
// Skeleton statistics
// ---------------------------------------------------------------------------

struct SkeletonRequest {
  bool marginals = false;
  bool profile = false;
  bool pair = false;
};

struct SkeletonSummary {
  std::size_t N = 0;
  std::vector<std::size_t> sites;  // 0-based, marginals/profile columns
  std::optional<MarginalAccumulator> marginals;
  std::optional<ProfileAccumulator> profile;
  std::optional<PairTableAccumulator> pair;  // sites N/2, N/2 + 1 (1-based)
  std::uint64_t events = 0;
  std::uint64_t ticks = 0;
};

/// Runs cfg.trajectories chains of length N on the h-skeleton and merges
/// the requested accumulators in trajectory order. Marginal and profile
/// columns cover cfg.sites (all sites when empty).
SkeletonSummary collect_skeleton(const ExperimentConfig& cfg, std::size_t N,
                                 SkeletonRequest request, unsigned threads);

struct MarginalRow {
  std::size_t site;  // 1-based
  GammaFit fit;
  ChiSquareReport gof;
};

std::vector<MarginalRow> analyze_marginals(const MarginalAccumulator& acc);

struct ProfileRow {
  std::size_t site;  // 1-based
  double empirical_mean;
  double empirical_se;
  std::optional<double> predicted_mean;
};

struct ProfileComparison {
  std::vector<ProfileRow> rows;
  TemperatureProfile predicted;
  std::size_t left_anchor;  // 1-based
  std::size_t right_anchor;
};

/// `profile` must cover every site of the chain. Anchors are 1-based.
ProfileComparison analyze_profile(const ProfileAccumulator& profile,
                                  RateKind kind, std::size_t left_anchor,
                                  std::size_t right_anchor);

struct IndependencePoint {
  std::size_t N;
  ChiSquareReport report;
};

// ---------------------------------------------------------------------------
// CSV / orchestration
// ---------------------------------------------------------------------------

/// %.17g: round-trips every double.
std::string format_double(double v);

std::string conductivity_csv(RateKind kind, double t_end,
                             std::uint64_t seed,
                             const std::vector<ConductivityPoint>& points);
std::string marginals_csv(const std::vector<MarginalRow>& rows);
std::string profile_csv(const ProfileComparison& comparison);
std::string independence_csv(const std::vector<IndependencePoint>& points);

struct RunOptions {
  unsigned threads = 0;  // 0: default_threads()
};

/// Runs one subcommand (conductivity-1d, conductivity-2d, marginals,
/// profile, independence) and writes its CSV to
/// <out_dir>/<prefix><subcommand>.csv. Returns the written paths.
std::vector<std::filesystem::path> run_experiment(
    const std::string& subcommand, const ExperimentConfig& cfg,
    const RunOptions& options, std::ostream& log);

}  // namespace heatchain
