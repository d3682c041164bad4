#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "heatchain/clock_table.hpp"
#include "heatchain/engine.hpp"
#include "heatchain/errors.hpp"
#include "heatchain/rng.hpp"
#include "heatchain/stats.hpp"

using namespace heatchain;

namespace {

struct EventLog : Observer {
  std::vector<EventRecord> events;
  void on_event(const EventRecord& r, const SystemState&) override {
    events.push_back(r);
  }
};

RunConfig chain_config(std::size_t n, RateKind kind, double t_end) {
  RunConfig rc{Topology::chain(n), RateSpec(kind), BathSpec(1.0, 2.0), {},
               t_end, 0.0, 5, {}, 0, {}};
  return rc;
}

}  // namespace

TEST_CASE("rng: uniform stays inside (0, 1)") {
  RngStream rng(0);
  double sum = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 1e6 - 0.5) < 3.0 * std::sqrt(1.0 / 12 / 1e6));
}

TEST_CASE("rng: derived streams are reproducible and distinct") {
  RngStream a = derive_stream(42, 7);
  RngStream b = derive_stream(42, 7);
  RngStream c = derive_stream(42, 8);
  RngStream d = derive_stream(43, 7);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differ_c |= x != c.next_u64();
    differ_d |= x != d.next_u64();
  }
  CHECK(differ_c);
  CHECK(differ_d);
}

TEST_CASE("rng: neighbouring streams are uncorrelated") {
  RngStream a = derive_stream(2024, 0);
  RngStream b = derive_stream(2024, 1);
  const int n = 1'000'000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform();
    const double y = b.uniform();
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
    sab += x * y;
  }
  const double cov = sab / n - sa / n * sb / n;
  const double rho = cov / std::sqrt((saa / n - sa * sa / n / n) *
                                     (sbb / n - sb * sb / n / n));
  CHECK(std::abs(rho) < 0.005);
}

TEST_CASE("clock table: totals and updates") {
  const std::vector<double> rates{1.0, 0.0, 2.5, 0.5, 3.0};
  ClockTable t(rates);
  CHECK(t.total_rate() == doctest::Approx(7.0));
  t.set_rate(1, 4.0);
  t.set_rate(4, 0.0);
  CHECK(t.total_rate() == doctest::Approx(8.0));
  CHECK(t.rates() == std::vector<double>{1.0, 4.0, 2.5, 0.5, 0.0});
  // Zero-rate clocks are never selected.
  for (double u = 0.0; u < 8.0; u += 0.01) CHECK(t.select(u) != 4);
  CHECK(t.select(8.0 - 1e-12) != 4);
}

TEST_CASE("clock table: selection frequencies are proportional to rates") {
  const std::vector<double> rates{0.5, 1.0, 0.0, 2.0, 4.0, 0.25, 0.25};
  ClockTable t(rates);
  RngStream rng(9);
  std::vector<std::uint64_t> counts(rates.size(), 0);
  const int n = 800'000;
  for (int i = 0; i < n; ++i) ++counts[t.select(rng.uniform() * t.total_rate())];
  CHECK(counts[2] == 0);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] == 0.0) continue;
    const double e = n * rates[i] / t.total_rate();
    chi2 += (counts[i] - e) * (counts[i] - e) / e;
  }
  CHECK(chi2 < chi2_quantile(5, 0.999));
}

TEST_CASE("clock set construction") {
  const SystemState s(Topology::chain(2), {1.0, 3.0});
  const ClockTable t = build_clock_set(s, RateSpec(RateKind::SumSqrt),
                                       BathSpec(1.0, 2.0));
  REQUIRE(t.size() == 3);
  CHECK(t.rate(0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(t.rate(1) == doctest::Approx(2.0));
  CHECK(t.rate(2) == doctest::Approx(std::sqrt(5.0)));

  const SystemState ring(Topology::ring(3), {1.0, 1.0, 1.0});
  CHECK(build_clock_set(ring, RateSpec(RateKind::SumSqrt), BathSpec(1, 1)).size() ==
        3);
  const SystemState lat(Topology::lattice(2, 2), {1.0, 1.0, 1.0, 1.0});
  CHECK(build_clock_set(lat, RateSpec(RateKind::SumSqrt), BathSpec(1, 1)).size() ==
        8);
}

TEST_CASE("next_event: waiting time is exponential with the total rate") {
  // Ring of two sites: two bonds, each at rate sqrt(0.3 + 0.7) = 1.
  Simulator sim(SystemState(Topology::ring(2), {0.3, 0.7}),
                RateSpec(RateKind::SumSqrt), BathSpec(1, 1));
  RngStream rng(17);
  const int n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dt = sim.next_event(rng).dt;
    sum += dt;
    sum_sq += dt * dt;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - 0.5) < 3.0 * se);
}

TEST_CASE("next_event: deadlock when every clock is stopped") {
  Simulator sim(SystemState(Topology::chain(2), {0.0, 0.0}),
                RateSpec(RateKind::HarmonicSqrt), BathSpec(1, 2));
  RngStream rng(1);
  CHECK_THROWS_AS(sim.next_event(rng), DeadlockError);
}

TEST_CASE("apply_event with explicit variates") {
  Simulator sim(SystemState(Topology::chain(2), {1.0, 3.0}),
                RateSpec(RateKind::SumSqrt), BathSpec(1, 2));
  const EventRecord pair = sim.apply_event_with(1, 0.5, 0.25, 0.0);
  CHECK(pair.kind == BondKind::Interior);
  CHECK(sim.state().energies == std::vector<double>{1.0, 3.0});
  CHECK(sim.state().time == 0.5);

  const EventRecord bath = sim.apply_event_with(0, 0.75, 0.5, 1.0);
  CHECK(bath.kind == BondKind::LeftBath);
  CHECK(bath.first_before == 1.0);
  CHECK(bath.first_after == doctest::Approx(1.0));

  sim.apply_event_with(2, 1.0, 0.5, 5.0);  // right bath: 0.5 * (3 + 5)
  CHECK(sim.state().energies[1] == doctest::Approx(4.0));
  // Incident clocks follow the new energies.
  const ClockTable fresh =
      build_clock_set(sim.state(), sim.rate_spec(), sim.baths());
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(sim.clocks().rate(b) == doctest::Approx(fresh.rate(b)));
  }
}

TEST_CASE("clock rates stay consistent over many events") {
  Simulator sim(SystemState(Topology::chain(20), std::vector<double>(20, 1.5)),
                RateSpec(RateKind::SumSqrt), BathSpec(1, 2));
  RngStream rng(23);
  double t = 0.0;
  for (std::uint64_t i = 0; i < Simulator::kRebuildInterval + 12345; ++i) {
    const auto d = sim.next_event(rng);
    t += d.dt;
    sim.apply_event(d.bond, t, rng);
  }
  const ClockTable fresh = build_clock_set(sim.state(), sim.rate_spec(), sim.baths());
  for (std::size_t b = 0; b < fresh.size(); ++b) {
    CHECK(sim.clocks().rate(b) == doctest::Approx(fresh.rate(b)).epsilon(1e-12));
  }
  CHECK(sim.clocks().total_rate() ==
        doctest::Approx(fresh.total_rate()).epsilon(1e-9));
}

TEST_CASE("event counts are Poisson when every clock is capped") {
  // Energies far above cap^2 keep every rate at the cap.
  const double cap = 1.0, T = 50.0;
  const std::size_t bonds = 4;
  const int runs = 400;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < runs; ++r) {
    RunConfig rc{Topology::ring(4), RateSpec(RateKind::CappedMinSqrt, cap),
                 BathSpec(1, 1), std::vector<double>(4, 1e8), T, 0.0, 77, {},
                 static_cast<std::uint64_t>(r), {}};
    const double n = static_cast<double>(run(rc, {}).events);
    sum += n;
    sum_sq += n * n;
  }
  const double lambda = bonds * cap * T;
  const double mean = sum / runs;
  const double var = sum_sq / runs - mean * mean;
  CHECK(std::abs(mean - lambda) < 3.0 * std::sqrt(lambda / runs));
  // Sample variance of a Poisson count: sd approx lambda * sqrt(2 / runs).
  CHECK(std::abs(var - lambda) < 4.0 * lambda * std::sqrt(2.0 / runs));
}

TEST_CASE("run: same seed gives identical event sequences") {
  RunConfig rc = chain_config(6, RateKind::HarmonicSqrt, 200.0);
  EventLog a, b;
  Observer* oa[] = {&a};
  Observer* ob[] = {&b};
  const RunReport ra = run(rc, oa);
  const RunReport rb = run(rc, ob);
  REQUIRE(a.events.size() == b.events.size());
  REQUIRE(!a.events.empty());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].bond == b.events[i].bond);
    CHECK(a.events[i].first_after == b.events[i].first_after);
  }
  CHECK(ra.final_state.energies == rb.final_state.energies);

  rc.trajectory = 1;
  EventLog c;
  Observer* oc[] = {&c};
  run(rc, oc);
  CHECK(c.events.front().time != a.events.front().time);
}

TEST_CASE("run: burn-in equal to the horizon observes nothing") {
  RunConfig rc = chain_config(4, RateKind::SumSqrt, 30.0);
  rc.burn_in = 30.0;
  EventLog log;
  Observer* obs[] = {&log};
  const RunReport r = run(rc, obs);
  CHECK(r.observed_events == 0);
  CHECK(log.events.empty());
  CHECK(r.events > 0);
}

TEST_CASE("run: observers see only post-burn-in events, in time order") {
  RunConfig rc = chain_config(5, RateKind::SumSqrt, 100.0);
  rc.burn_in = 40.0;
  EventLog log;
  Observer* obs[] = {&log};
  const RunReport r = run(rc, obs);
  REQUIRE(!log.events.empty());
  CHECK(log.events.size() == r.observed_events);
  double last = 40.0;
  for (const auto& e : log.events) {
    CHECK(e.time >= last);
    CHECK(e.time <= 100.0);
    last = e.time;
  }
}

TEST_CASE("run: skeleton ticks") {
  struct Ticks : Observer {
    std::vector<std::uint64_t> k;
    std::vector<double> t;
    void on_tick(std::uint64_t i, const SystemState& s) override {
      k.push_back(i);
      t.push_back(s.time);
    }
  } ticks;
  RunConfig rc = chain_config(3, RateKind::SumSqrt, 20.0);
  rc.burn_in = 10.0;
  rc.skeleton_period = 2.0;
  Observer* obs[] = {&ticks};
  const RunReport r = run(rc, obs);
  CHECK(r.ticks == 5);
  CHECK(ticks.k == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  for (std::size_t i = 0; i < ticks.t.size(); ++i) {
    CHECK(ticks.t[i] <= 10.0 + 2.0 * (i + 1));
  }
  rc.max_ticks = 3;
  CHECK(rc.tick_count() == 3);
}

TEST_CASE("run: invalid configurations") {
  RunConfig rc = chain_config(3, RateKind::SumSqrt, 10.0);
  rc.burn_in = 11.0;
  CHECK_THROWS_AS(run(rc, {}), DomainError);
  rc = chain_config(3, RateKind::SumSqrt, 10.0);
  rc.initial_energies = {1.0, 2.0};
  CHECK_THROWS_AS(run(rc, {}), DomainError);
  rc = chain_config(3, RateKind::SumSqrt, 10.0);
  rc.skeleton_period = 0.0;
  CHECK_THROWS_AS(run(rc, {}), DomainError);
}

TEST_CASE("run: observer failures carry context") {
  struct Boom : Observer {
    void on_event(const EventRecord&, const SystemState&) override {
      throw std::runtime_error("boom");
    }
  } boom;
  RunConfig rc = chain_config(3, RateKind::SumSqrt, 10.0);
  Observer* obs[] = {&boom};
  CHECK_THROWS_AS(run(rc, obs), ObserverError);
}
