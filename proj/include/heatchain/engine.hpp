#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "heatchain/clock_table.hpp"
#include "heatchain/model.hpp"
#include "heatchain/rng.hpp"

namespace heatchain {

/// One energy exchange. For bath events `second` is Bond::npos and the
/// second_* energies are zero; `drawn` is the bath draw (zero otherwise).
struct EventRecord {
  double time = 0.0;
  std::size_t bond = 0;
  BondKind kind = BondKind::Interior;
  std::size_t first = 0;
  std::size_t second = Bond::npos;
  double first_before = 0.0;
  double first_after = 0.0;
  double second_before = 0.0;
  double second_after = 0.0;
  double drawn = 0.0;
};

/// Receives the post-burn-in event stream and the skeleton ticks of a run.
/// On a tick, state.time is the tick time and the energies are those in
/// force at that instant.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_event(const EventRecord& /*record*/,
                        const SystemState& /*state*/) {}
  virtual void on_tick(std::uint64_t /*k*/, const SystemState& /*state*/) {}
};

ClockTable build_clock_set(const SystemState& state, const RateSpec& spec,
                           const BathSpec& baths);

/// Exact direct-method simulator of the exchange process: the next event
/// time is exponential with the total clock rate, the bond is picked with
/// probability rate / total. Memorylessness makes redrawing after every
/// event exact.
class Simulator {
 public:
  static constexpr std::uint64_t kRebuildInterval = std::uint64_t{1} << 20;

  struct Draw {
    double dt;
    std::size_t bond;
  };

  Simulator(SystemState state, RateSpec rate, BathSpec baths);

  const SystemState& state() const { return state_; }
  const ClockTable& clocks() const { return clocks_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  const RateSpec& rate_spec() const { return rate_; }
  const BathSpec& baths() const { return baths_; }
  std::uint64_t events() const { return events_; }

  /// Throws DeadlockError when the total rate is zero.
  Draw next_event(RngStream& rng) const;

  /// Fires `bond` at `event_time` with fresh variates from `rng`.
  EventRecord apply_event(std::size_t bond, double event_time, RngStream& rng);

  /// Same as apply_event with explicit variates; `drawn` is ignored for
  /// pair bonds.
  EventRecord apply_event_with(std::size_t bond, double event_time, double p,
                               double drawn);

  void set_time(double t) { state_.time = t; }

 private:
  double bond_rate(const Bond& bond) const;
  void refresh_site(std::size_t site);

  SystemState state_;
  RateSpec rate_;
  BathSpec baths_;
  std::vector<Bond> bonds_;
  std::vector<std::size_t> incident_offsets_;
  std::vector<std::size_t> incident_bonds_;
  ClockTable clocks_;
  std::uint64_t events_ = 0;
};

struct RunConfig {
  Topology topology;
  RateSpec rate;
  BathSpec baths;
  /// Empty: every site starts at (T_left + T_right) / 2.
  std::vector<double> initial_energies;
  double t_end = 0.0;
  double burn_in = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> skeleton_period;
  std::uint64_t trajectory = 0;
  /// Upper bound on the number of skeleton ticks delivered.
  std::optional<std::uint64_t> max_ticks;

  void validate() const;
  std::vector<double> starting_energies() const;
  /// floor((t_end - burn_in) / h), capped by max_ticks; 0 without h.
  std::uint64_t tick_count() const;
};

struct RunReport {
  SystemState final_state;
  std::uint64_t events = 0;
  std::uint64_t observed_events = 0;
  std::uint64_t ticks = 0;
  double wall_seconds = 0.0;
};

/// Runs one trajectory on the stream derive_stream(seed, trajectory).
/// Observers see every event at time >= burn_in and every skeleton tick
/// at burn_in + k h, k = 1..tick_count().
RunReport run(const RunConfig& config, std::span<Observer* const> observers);

}  // namespace heatchain
