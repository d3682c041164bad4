#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "heatchain/engine.hpp"
#include "heatchain/stats.hpp"

namespace heatchain {

/// Energy moved from right to left by one event. Horizontal bond (k, k+1):
/// gain of site k. Left bath: energy lost by the first site. Right bath:
/// energy gained by the last site. Vertical bonds carry no horizontal flux.
double flux_of_event(const EventRecord& record);

/// Streaming flux accumulator over the observation window [start, end).
/// The window is cut into equal-time batches for batch-means errors.
class FluxLedger : public Observer {
 public:
  static constexpr std::size_t kDefaultBatches = 20;

  FluxLedger(std::size_t bond_count, double start, double end,
             std::size_t batches = kDefaultBatches);

  void on_event(const EventRecord& record, const SystemState& state) override;
  void record(const EventRecord& record);

  /// Pools another trajectory's ledger: fluxes, spans and counts add and
  /// its batches are appended. Requires equal bond counts and batch widths.
  void merge(const FluxLedger& other);

  double total_flux() const { return total_flux_; }
  double time_span() const { return span_; }
  double batch_width() const { return batch_width_; }
  std::size_t bond_count() const { return bond_flux_.size(); }
  std::size_t batch_count() const { return batch_flux_.size(); }
  const std::vector<double>& bond_flux() const { return bond_flux_; }
  const std::vector<double>& batch_flux() const { return batch_flux_; }
  /// Per-batch per-bond flux, batch-major.
  const std::vector<double>& batch_bond_flux() const {
    return batch_bond_flux_;
  }
  std::uint64_t events() const;
  std::uint64_t events_of(BondKind kind) const {
    return kind_counts_[static_cast<std::size_t>(kind)];
  }

 private:
  double start_;
  double span_;
  double batch_width_;
  std::size_t batches_per_run_;
  double total_flux_ = 0.0;
  std::vector<double> bond_flux_;
  std::vector<double> batch_flux_;
  std::vector<double> batch_bond_flux_;
  std::uint64_t kind_counts_[4] = {0, 0, 0, 0};
};

struct ConductivityEstimate {
  double kappa = 0.0;
  double q = 0.0;  // kappa / (N + 1)
  double kappa_stderr = 0.0;
  double q_stderr = 0.0;
  std::size_t N = 0;  // columns
  std::size_t M = 1;  // rows
  double time_span = 0.0;
  std::uint64_t seed = 0;
};

/// kappa = (1/M) (1/T_span) (1/(T_R - T_L)) sum J over every horizontal and
/// bath event; q = kappa / (N + 1). Standard errors from batch means.
ConductivityEstimate conductivity_estimate(const FluxLedger& ledger,
                                           const BathSpec& baths,
                                           const Topology& topology,
                                           std::uint64_t seed = 0);

struct BondFluxProfile {
  std::vector<double> mean;    // sum J / T_span per bond
  std::vector<double> standard_error;  // batch means
};

BondFluxProfile bond_flux_profile(const FluxLedger& ledger);

/// Skeleton samples: energies of `sites` at times burn_in + k h.
struct SampleMatrix {
  std::vector<std::size_t> sites;
  double period = 0.0;
  std::vector<double> values;  // row-major, one row per tick

  std::size_t rows() const {
    return sites.empty() ? 0 : values.size() / sites.size();
  }
  double at(std::size_t row, std::size_t column) const {
    return values[row * sites.size() + column];
  }
  std::vector<double> column(std::size_t column) const;
};

/// Records a SampleMatrix from the tick stream.
class SkeletonRecorder : public Observer {
 public:
  SkeletonRecorder(std::vector<std::size_t> sites, double period);

  void on_tick(std::uint64_t k, const SystemState& state) override;

  const SampleMatrix& samples() const { return samples_; }
  SampleMatrix take() { return std::move(samples_); }

 private:
  SampleMatrix samples_;
};

/// Runs `config` and returns the skeleton of the requested sites.
SampleMatrix skeleton_sample(const RunConfig& config,
                             std::vector<std::size_t> sites);

struct EnergyProfile {
  std::vector<double> mean;
  std::vector<double> standard_error;  // batch means over rows; NaN with < 2 rows
};

EnergyProfile energy_profile(const SampleMatrix& samples,
                             std::size_t batches = 20);

/// Streaming per-site means with batch-means errors over a known number of
/// ticks; the memory-light counterpart of SkeletonRecorder + energy_profile.
class ProfileAccumulator : public Observer {
 public:
  ProfileAccumulator(std::vector<std::size_t> sites, std::uint64_t ticks,
                     std::size_t batches = 20);

  void on_tick(std::uint64_t k, const SystemState& state) override;
  void merge(const ProfileAccumulator& other);

  const std::vector<std::size_t>& sites() const { return sites_; }
  std::uint64_t count() const { return count_; }
  EnergyProfile profile() const;

 private:
  std::vector<std::size_t> sites_;
  std::uint64_t ticks_per_run_;
  std::size_t batches_per_run_;
  std::uint64_t count_ = 0;
  std::vector<double> sum_;
  std::vector<double> batch_sum_;       // batch-major
  std::vector<std::uint64_t> batch_n_;  // samples per batch
};

/// Per-site Gamma sufficient statistics and fixed-edge bin counts.
class MarginalAccumulator : public Observer {
 public:
  MarginalAccumulator(std::vector<std::size_t> sites, BinEdges edges);

  void on_tick(std::uint64_t k, const SystemState& state) override;
  void merge(const MarginalAccumulator& other);

  const std::vector<std::size_t>& sites() const { return sites_; }
  const BinEdges& edges() const { return edges_; }
  const GammaSufficientStats& stats(std::size_t column) const {
    return stats_[column];
  }
  std::span<const std::uint64_t> counts(std::size_t column) const;

 private:
  std::vector<std::size_t> sites_;
  BinEdges edges_;
  std::vector<GammaSufficientStats> stats_;
  std::vector<std::uint64_t> counts_;  // site-major
};

/// Joint bin counts of two sites on the skeleton.
class PairTableAccumulator : public Observer {
 public:
  PairTableAccumulator(std::size_t first, std::size_t second, BinEdges edges);

  void on_tick(std::uint64_t k, const SystemState& state) override;
  void merge(const PairTableAccumulator& other) { table_.merge(other.table_); }

  const ContingencyTable& table() const { return table_; }

 private:
  std::size_t first_;
  std::size_t second_;
  ContingencyTable table_;
};

}  // namespace heatchain
