#include "heatchain/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "heatchain/errors.hpp"

namespace heatchain {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Standard error of the mean of equally weighted batch values.
double batch_stderr(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return kNaN;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

double flux_of_event(const EventRecord& record) {
  switch (record.kind) {
    case BondKind::Interior:
      return record.first_after - record.first_before;
    case BondKind::LeftBath:
      return record.first_before - record.first_after;
    case BondKind::RightBath:
      return record.first_after - record.first_before;
    case BondKind::Vertical:
      return 0.0;
  }
  return 0.0;
}

FluxLedger::FluxLedger(std::size_t bond_count, double start, double end,
                       std::size_t batches)
    : start_(start),
      span_(end - start),
      batch_width_((end - start) / static_cast<double>(batches)),
      batches_per_run_(batches),
      bond_flux_(bond_count, 0.0),
      batch_flux_(batches, 0.0),
      batch_bond_flux_(batches * bond_count, 0.0) {
  if (batches == 0) throw DomainError("FluxLedger: need at least one batch");
  if (!(end >= start)) throw DomainError("FluxLedger: end before start");
}

void FluxLedger::on_event(const EventRecord& record, const SystemState&) {
  this->record(record);
}

void FluxLedger::record(const EventRecord& rec) {
  ++kind_counts_[static_cast<std::size_t>(rec.kind)];
  const double j = flux_of_event(rec);
  if (j == 0.0) return;
  total_flux_ += j;
  bond_flux_[rec.bond] += j;
  auto b = static_cast<std::size_t>((rec.time - start_) / batch_width_);
  b = std::min(b, batches_per_run_ - 1);
  batch_flux_[b] += j;
  batch_bond_flux_[b * bond_flux_.size() + rec.bond] += j;
}

void FluxLedger::merge(const FluxLedger& other) {
  if (other.bond_flux_.size() != bond_flux_.size()) {
    throw DomainError("FluxLedger::merge: bond counts differ");
  }
  if (std::abs(other.batch_width_ - batch_width_) >
      1e-12 * std::max(1.0, batch_width_)) {
    throw DomainError("FluxLedger::merge: batch widths differ");
  }
  total_flux_ += other.total_flux_;
  span_ += other.span_;
  for (std::size_t i = 0; i < bond_flux_.size(); ++i) {
    bond_flux_[i] += other.bond_flux_[i];
  }
  batch_flux_.insert(batch_flux_.end(), other.batch_flux_.begin(),
                     other.batch_flux_.end());
  batch_bond_flux_.insert(batch_bond_flux_.end(),
                          other.batch_bond_flux_.begin(),
                          other.batch_bond_flux_.end());
  for (std::size_t k = 0; k < 4; ++k) kind_counts_[k] += other.kind_counts_[k];
}

std::uint64_t FluxLedger::events() const {
  return kind_counts_[0] + kind_counts_[1] + kind_counts_[2] + kind_counts_[3];
}

ConductivityEstimate conductivity_estimate(const FluxLedger& ledger,
                                           const BathSpec& baths,
                                           const Topology& topology,
                                           std::uint64_t seed) {
  const double gradient = baths.T_right - baths.T_left;
  if (gradient == 0.0) {
    throw DomainError("conductivity undefined for equal bath temperatures");
  }
  if (!(ledger.time_span() > 0.0)) {
    throw DomainError("conductivity needs a positive observation span");
  }
  const double M = static_cast<double>(topology.rows());
  const double norm = 1.0 / (M * gradient);

  ConductivityEstimate est;
  est.N = topology.columns();
  est.M = topology.rows();
  est.time_span = ledger.time_span();
  est.seed = seed;
  est.kappa = norm * ledger.total_flux() / ledger.time_span();
  est.q = est.kappa / static_cast<double>(est.N + 1);

  std::vector<double> batch_kappa;
  batch_kappa.reserve(ledger.batch_count());
  for (double j : ledger.batch_flux()) {
    batch_kappa.push_back(norm * j / ledger.batch_width());
  }
  est.kappa_stderr = batch_stderr(batch_kappa);
  est.q_stderr = est.kappa_stderr / static_cast<double>(est.N + 1);
  return est;
}

BondFluxProfile bond_flux_profile(const FluxLedger& ledger) {
  const std::size_t bonds = ledger.bond_count();
  BondFluxProfile out;
  out.mean.assign(bonds, 0.0);
  out.standard_error.assign(bonds, kNaN);
  if (!(ledger.time_span() > 0.0)) {
    throw DomainError("bond_flux_profile needs a positive span");
  }
  for (std::size_t b = 0; b < bonds; ++b) {
    out.mean[b] = ledger.bond_flux()[b] / ledger.time_span();
  }
  const std::size_t batches = ledger.batch_count();
  std::vector<double> column(batches);
  for (std::size_t b = 0; b < bonds; ++b) {
    for (std::size_t k = 0; k < batches; ++k) {
      column[k] = ledger.batch_bond_flux()[k * bonds + b] / ledger.batch_width();
    }
    out.standard_error[b] = batch_stderr(column);
  }
  return out;
}

std::vector<double> SampleMatrix::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, c);
  return out;
}

SkeletonRecorder::SkeletonRecorder(std::vector<std::size_t> sites,
                                   double period) {
  samples_.sites = std::move(sites);
  samples_.period = period;
}

void SkeletonRecorder::on_tick(std::uint64_t, const SystemState& state) {
  for (std::size_t s : samples_.sites) {
    samples_.values.push_back(state.energies.at(s));
  }
}

SampleMatrix skeleton_sample(const RunConfig& config,
                             std::vector<std::size_t> sites) {
  if (!config.skeleton_period) {
    throw DomainError("skeleton_sample requires a skeleton period");
  }
  SkeletonRecorder recorder(std::move(sites), *config.skeleton_period);
  Observer* observers[] = {&recorder};
  run(config, observers);
  return recorder.take();
}

EnergyProfile energy_profile(const SampleMatrix& samples,
                             std::size_t batches) {
  const std::size_t rows = samples.rows();
  if (rows == 0) throw AnalysisError("energy_profile: no samples");
  const std::size_t cols = samples.sites.size();
  EnergyProfile out;
  out.mean.assign(cols, 0.0);
  out.standard_error.assign(cols, kNaN);
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += samples.at(r, c);
    out.mean[c] = s / static_cast<double>(rows);
  }
  const std::size_t B = std::min(batches, rows);
  if (B < 2) return out;
  std::vector<double> batch_mean(B);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t lo = b * rows / B;
      const std::size_t hi = (b + 1) * rows / B;
      double s = 0.0;
      for (std::size_t r = lo; r < hi; ++r) s += samples.at(r, c);
      batch_mean[b] = s / static_cast<double>(hi - lo);
    }
    out.standard_error[c] = batch_stderr(batch_mean);
  }
  return out;
}

ProfileAccumulator::ProfileAccumulator(std::vector<std::size_t> sites,
                                       std::uint64_t ticks,
                                       std::size_t batches)
    : sites_(std::move(sites)),
      ticks_per_run_(ticks),
      batches_per_run_(std::max<std::size_t>(
          1, static_cast<std::size_t>(std::min<std::uint64_t>(batches, ticks)))),
      sum_(sites_.size(), 0.0),
      batch_sum_(batches_per_run_ * sites_.size(), 0.0),
      batch_n_(batches_per_run_, 0) {}

void ProfileAccumulator::on_tick(std::uint64_t k, const SystemState& state) {
  const std::size_t b = static_cast<std::size_t>(
      std::min<std::uint64_t>((k - 1) * batches_per_run_ / ticks_per_run_,
                              batches_per_run_ - 1));
  const std::size_t base = batch_sum_.size() - batches_per_run_ * sites_.size();
  ++count_;
  ++batch_n_[batch_n_.size() - batches_per_run_ + b];
  for (std::size_t c = 0; c < sites_.size(); ++c) {
    const double e = state.energies[sites_[c]];
    sum_[c] += e;
    batch_sum_[base + b * sites_.size() + c] += e;
  }
}

void ProfileAccumulator::merge(const ProfileAccumulator& other) {
  if (other.sites_ != sites_) {
    throw DomainError("ProfileAccumulator::merge: site lists differ");
  }
  count_ += other.count_;
  for (std::size_t c = 0; c < sum_.size(); ++c) sum_[c] += other.sum_[c];
  batch_sum_.insert(batch_sum_.end(), other.batch_sum_.begin(),
                    other.batch_sum_.end());
  batch_n_.insert(batch_n_.end(), other.batch_n_.begin(),
                  other.batch_n_.end());
}

EnergyProfile ProfileAccumulator::profile() const {
  if (count_ == 0) throw AnalysisError("energy profile: no samples");
  EnergyProfile out;
  const std::size_t cols = sites_.size();
  out.mean.resize(cols);
  out.standard_error.assign(cols, kNaN);
  for (std::size_t c = 0; c < cols; ++c) {
    out.mean[c] = sum_[c] / static_cast<double>(count_);
  }
  std::vector<double> means;
  for (std::size_t c = 0; c < cols; ++c) {
    means.clear();
    for (std::size_t b = 0; b < batch_n_.size(); ++b) {
      if (batch_n_[b] == 0) continue;
      means.push_back(batch_sum_[b * cols + c] /
                      static_cast<double>(batch_n_[b]));
    }
    out.standard_error[c] = batch_stderr(means);
  }
  return out;
}

MarginalAccumulator::MarginalAccumulator(std::vector<std::size_t> sites,
                                         BinEdges edges)
    : sites_(std::move(sites)),
      edges_(std::move(edges)),
      stats_(sites_.size()),
      counts_(sites_.size() * (edges_.size() - 1), 0) {
  validate_edges(edges_);
}

void MarginalAccumulator::on_tick(std::uint64_t, const SystemState& state) {
  const std::size_t bins = edges_.size() - 1;
  for (std::size_t c = 0; c < sites_.size(); ++c) {
    const double e = state.energies[sites_[c]];
    stats_[c].add(e);
    ++counts_[c * bins + bin_index(edges_, e)];
  }
}

void MarginalAccumulator::merge(const MarginalAccumulator& other) {
  if (other.sites_ != sites_ || other.edges_ != edges_) {
    throw DomainError("MarginalAccumulator::merge: layouts differ");
  }
  for (std::size_t c = 0; c < stats_.size(); ++c) {
    stats_[c].merge(other.stats_[c]);
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    counts_[i] += other.counts_[i];
  }
}

std::span<const std::uint64_t> MarginalAccumulator::counts(
    std::size_t column) const {
  const std::size_t bins = edges_.size() - 1;
  return std::span<const std::uint64_t>(counts_).subspan(column * bins, bins);
}

PairTableAccumulator::PairTableAccumulator(std::size_t first,
                                           std::size_t second, BinEdges edges)
    : first_(first), second_(second), table_(edges, edges) {}

void PairTableAccumulator::on_tick(std::uint64_t, const SystemState& state) {
  table_.add(state.energies[first_], state.energies[second_]);
}

}  // namespace heatchain
