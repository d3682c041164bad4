#include "heatchain/engine.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <string>

#include "heatchain/errors.hpp"

namespace heatchain {

namespace {

double rate_of(const Bond& bond, const std::vector<double>& E,
               const RateSpec& spec, const BathSpec& baths) {
  switch (bond.kind) {
    case BondKind::LeftBath:
      return boundary_rate(spec, baths.T_left, E[bond.first]);
    case BondKind::RightBath:
      return boundary_rate(spec, baths.T_right, E[bond.first]);
    default:
      return pair_rate(spec, E[bond.first], E[bond.second]);
  }
}

}  // namespace

ClockTable build_clock_set(const SystemState& state, const RateSpec& spec,
                           const BathSpec& baths) {
  const auto bonds = enumerate_bonds(state.topology);
  std::vector<double> rates;
  rates.reserve(bonds.size());
  for (const Bond& bond : bonds) {
    rates.push_back(rate_of(bond, state.energies, spec, baths));
  }
  return ClockTable(rates);
}

Simulator::Simulator(SystemState state, RateSpec rate, BathSpec baths)
    : state_(std::move(state)),
      rate_(rate),
      baths_(baths),
      bonds_(enumerate_bonds(state_.topology)) {
  const std::size_t n = state_.topology.sites();
  incident_offsets_.assign(n + 1, 0);
  for (const Bond& b : bonds_) {
    ++incident_offsets_[b.first + 1];
    if (!b.is_bath()) ++incident_offsets_[b.second + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    incident_offsets_[i + 1] += incident_offsets_[i];
  }
  incident_bonds_.resize(incident_offsets_[n]);
  std::vector<std::size_t> fill(incident_offsets_.begin(),
                                incident_offsets_.end() - 1);
  for (std::size_t id = 0; id < bonds_.size(); ++id) {
    incident_bonds_[fill[bonds_[id].first]++] = id;
    if (!bonds_[id].is_bath()) incident_bonds_[fill[bonds_[id].second]++] = id;
  }
  clocks_ = build_clock_set(state_, rate_, baths_);
}

double Simulator::bond_rate(const Bond& bond) const {
  return rate_of(bond, state_.energies, rate_, baths_);
}

void Simulator::refresh_site(std::size_t site) {
  for (std::size_t k = incident_offsets_[site]; k < incident_offsets_[site + 1];
       ++k) {
    const std::size_t id = incident_bonds_[k];
    clocks_.set_rate(id, bond_rate(bonds_[id]));
  }
}

Simulator::Draw Simulator::next_event(RngStream& rng) const {
  const double total = clocks_.total_rate();
  if (!(total > 0.0)) {
    throw DeadlockError("all exchange clocks have rate zero at t = " +
                        std::to_string(state_.time));
  }
  const double dt = -std::log(rng.uniform()) / total;
  const std::size_t bond = clocks_.select(rng.uniform() * total);
  return {dt, bond};
}

EventRecord Simulator::apply_event(std::size_t bond, double event_time,
                                   RngStream& rng) {
  const Bond& b = bonds_.at(bond);
  if (b.is_bath()) {
    const double T = b.kind == BondKind::LeftBath ? baths_.T_left
                                                  : baths_.T_right;
    const double drawn = rng.exponential(T);
    const double p = rng.uniform();
    return apply_event_with(bond, event_time, p, drawn);
  }
  return apply_event_with(bond, event_time, rng.uniform(), 0.0);
}

EventRecord Simulator::apply_event_with(std::size_t bond, double event_time,
                                        double p, double drawn) {
  const Bond& b = bonds_.at(bond);
  auto& E = state_.energies;
  EventRecord rec;
  rec.time = event_time;
  rec.bond = bond;
  rec.kind = b.kind;
  rec.first = b.first;
  rec.second = b.second;
  rec.first_before = E[b.first];
  if (b.is_bath()) {
    rec.drawn = drawn;
    E[b.first] = apply_boundary_exchange(E[b.first], drawn, p);
    rec.first_after = E[b.first];
    refresh_site(b.first);
  } else {
    rec.second_before = E[b.second];
    const auto [x, y] = apply_pair_exchange(E[b.first], E[b.second], p);
    E[b.first] = x;
    E[b.second] = y;
    rec.first_after = x;
    rec.second_after = y;
    refresh_site(b.first);
    refresh_site(b.second);
  }
  state_.time = event_time;
  if (++events_ % kRebuildInterval == 0) clocks_.rebuild();
  return rec;
}

void RunConfig::validate() const {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw DomainError("t_end must be finite and non-negative");
  }
  if (!(burn_in >= 0.0) || burn_in > t_end) {
    throw DomainError("burn-in must satisfy 0 <= burn_in <= t_end");
  }
  if (skeleton_period && !(*skeleton_period > 0.0)) {
    throw DomainError("skeleton period must be positive");
  }
  if (!initial_energies.empty() &&
      initial_energies.size() != topology.sites()) {
    throw DomainError("initial energies do not match the topology");
  }
}

std::vector<double> RunConfig::starting_energies() const {
  if (!initial_energies.empty()) return initial_energies;
  return std::vector<double>(topology.sites(),
                             0.5 * (baths.T_left + baths.T_right));
}

std::uint64_t RunConfig::tick_count() const {
  if (!skeleton_period) return 0;
  const double span = t_end - burn_in;
  auto n = static_cast<std::uint64_t>(std::floor(span / *skeleton_period));
  // Guard against floor() landing one past the window through rounding.
  while (n > 0 && burn_in + static_cast<double>(n) * *skeleton_period > t_end) {
    --n;
  }
  if (max_ticks && *max_ticks < n) n = *max_ticks;
  return n;
}

namespace {

template <typename Fn>
void notify(Fn&& fn, const char* what, double t) {
  try {
    fn();
  } catch (const std::exception& e) {
    throw ObserverError(std::string("observer failed in ") + what +
                        " at t = " + std::to_string(t) + ": " + e.what());
  }
}

}  // namespace

RunReport run(const RunConfig& config, std::span<Observer* const> observers) {
  config.validate();
  const auto wall_start = std::chrono::steady_clock::now();

  Simulator sim(SystemState(config.topology, config.starting_energies()),
                config.rate, config.baths);
  RngStream rng = derive_stream(config.seed, config.trajectory);

  const std::uint64_t ticks = config.tick_count();
  const double h = config.skeleton_period.value_or(0.0);
  std::uint64_t next_tick = 1;
  std::uint64_t observed = 0;

  auto emit_ticks_until = [&](double t) {
    while (next_tick <= ticks) {
      const double tick_time =
          config.burn_in + static_cast<double>(next_tick) * h;
      if (tick_time > t) break;
      const double now = sim.state().time;
      sim.set_time(tick_time);
      for (Observer* obs : observers) {
        notify([&] { obs->on_tick(next_tick, sim.state()); }, "on_tick",
               tick_time);
      }
      sim.set_time(now);
      ++next_tick;
    }
  };

  while (sim.state().time < config.t_end) {
    const auto draw = sim.next_event(rng);
    const double t_next = sim.state().time + draw.dt;
    emit_ticks_until(std::min(t_next, config.t_end));
    if (t_next >= config.t_end) break;
    const EventRecord rec = sim.apply_event(draw.bond, t_next, rng);
    if (t_next >= config.burn_in) {
      ++observed;
      for (Observer* obs : observers) {
        notify([&] { obs->on_event(rec, sim.state()); }, "on_event", t_next);
      }
    }
  }
  emit_ticks_until(config.t_end);
  sim.set_time(config.t_end);

  RunReport report{sim.state(), sim.events(), observed, next_tick - 1, 0.0};
  report.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - wall_start)
                            .count();
  return report;
}

}  // namespace heatchain
