#include "heatchain/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "heatchain/engine.hpp"
#include "heatchain/errors.hpp"
#include "heatchain/experiment.hpp"
#include "heatchain/stats.hpp"

namespace heatchain {

namespace {

std::string label(const char* check, RateKind kind) {
  return std::string(check) + "/" + std::string(to_string(kind));
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// Running mean and variance (Welford).
struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stderr_of_mean() const {
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

class RatioBinner : public Observer {
 public:
  RatioBinner(std::vector<double> edges, double total)
      : edges_(std::move(edges)), total_(total), counts_(edges_.size() - 1) {}
  void on_tick(std::uint64_t, const SystemState& state) override {
    ++counts_[bin_index(edges_, state.energies[0] / total_)];
  }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

 private:
  std::vector<double> edges_;
  double total_;
  std::vector<std::uint64_t> counts_;
};

}  // namespace

double sample_stationary(RateKind kind, double T, RngStream& rng) {
  if (kind == RateKind::SumSqrt) return rng.exponential(T);
  const double r = std::sqrt(-2.0 * std::log(rng.uniform()));
  const double z = r * std::cos(2.0 * std::numbers::pi * rng.uniform());
  return 0.5 * T * z * z;
}

DriftEstimate monte_carlo_drift(std::span<const double> coeffs,
                                const SystemState& start, const BathSpec& baths,
                                const RateSpec& spec, double h,
                                std::uint64_t replicas, RngStream& rng) {
  if (coeffs.size() != start.energies.size()) {
    throw DomainError("monte_carlo_drift: coefficient count mismatch");
  }
  if (replicas < 2) throw DomainError("monte_carlo_drift: need 2 replicas");
  auto f = [&](const std::vector<double>& e) {
    double v = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) v += coeffs[i] * e[i];
    return v;
  };
  const double f0 = f(start.energies);
  Moments m;
  for (std::uint64_t r = 0; r < replicas; ++r) {
    Simulator sim(start, spec, baths);
    double t = start.time;
    for (;;) {
      const auto draw = sim.next_event(rng);
      if (t + draw.dt > start.time + h) break;
      t += draw.dt;
      sim.apply_event(draw.bond, t, rng);
    }
    m.add((f(sim.state().energies) - f0) / h);
  }
  return {m.mean, m.stderr_of_mean()};
}

CheckResult check_balance_residual(RateKind kind) {
  double worst = 0.0;
  for (double T : {0.5, 1.0, 2.0}) {
    for (int i = 1; i <= 10; ++i) {
      for (int j = 1; j <= 10; ++j) {
        const double e1 = 0.3 * i * T;
        const double e2 = 0.3 * j * T;
        worst = std::max(worst, std::abs(pair_balance_residual(kind, T, e1, e2)));
      }
    }
  }
  return {label("balance_residual", kind), worst, 1e-8, worst <= 1e-8,
          "10x10 grid, T in {0.5,1,2}"};
}

CheckResult check_flux_quadrature(RateKind kind, std::uint64_t seed) {
  RngStream rng = derive_stream(seed, 1);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double T = 0.5 + 3.5 * rng.uniform();
    const double T_hat = 0.5 + 3.5 * rng.uniform();
    const double closed = theoretical_flux(kind, T, T_hat);
    const double quad = theoretical_flux_quadrature(kind, T, T_hat);
    const double scale = std::max(std::abs(closed), 1e-300);
    worst = std::max(worst, std::abs(closed - quad) / scale);
  }
  return {label("flux_quadrature", kind), worst, 1e-6, worst <= 1e-6,
          "20 random pairs in [0.5,4]^2"};
}

CheckResult check_flux_monte_carlo(RateKind kind, std::uint64_t draws,
                                   std::uint64_t seed) {
  const RateSpec spec(kind);
  const double pairs[][2] = {{1.0, 2.0}, {2.5, 0.7}};
  double worst = 0.0;
  std::ostringstream detail;
  for (std::size_t k = 0; k < 2; ++k) {
    const double T = pairs[k][0];
    const double T_hat = pairs[k][1];
    RngStream rng = derive_stream(seed, 2 + k + 10 * static_cast<std::uint64_t>(kind));
    Moments m;
    for (std::uint64_t d = 0; d < draws; ++d) {
      const double x = sample_stationary(kind, T, rng);
      const double y = sample_stationary(kind, T_hat, rng);
      m.add(0.5 * pair_rate(spec, x, y) * (y - x));
    }
    const double z = (m.mean - theoretical_flux(kind, T, T_hat)) / m.stderr_of_mean();
    worst = std::max(worst, std::abs(z));
    detail << (k ? " " : "") << "z(" << T << "," << T_hat << ")=" << z;
  }
  return {label("flux_monte_carlo", kind), worst, 3.0, worst <= 3.0,
          detail.str()};
}

CheckResult check_ring_equilibrium(RateKind kind, std::uint64_t samples,
                                   std::uint64_t seed) {
  constexpr std::size_t N = 8;
  const double a = kind == RateKind::SumSqrt ? 1.0 : 0.5;
  const double b = a * (N - 1);
  const double h = kind == RateKind::SumSqrt ? 5.0 : 25.0;

  std::vector<double> edges{0.0};
  for (int k = 1; k < 30; ++k) {
    edges.push_back(boost::math::ibeta_inv(a, b, k / 30.0));
  }
  edges.push_back(std::numeric_limits<double>::infinity());

  RunConfig rc{Topology::ring(N), RateSpec(kind), BathSpec(1.0, 1.0),
               std::vector<double>(N, 1.0), 0.0, 100.0 * h, seed, h, 0,
               samples};
  rc.t_end = rc.burn_in + (static_cast<double>(samples) + 0.5) * h;
  RatioBinner binner(edges, static_cast<double>(N));
  Observer* observers[] = {&binner};
  run(rc, observers);

  const auto report = chisq_gof_counts(
      binner.counts(), edges,
      [a, b](double x) {
        return x >= 1.0 ? 1.0 : boost::math::ibeta(a, b, std::max(x, 0.0));
      },
      0, 0.99);
  return {label("ring_equilibrium", kind), report.statistic, report.threshold,
          report.pass,
          fmt("E_1/S ~ Beta(%g,%g), 30 bins, 1%% level", a, b)};
}

CheckResult check_generator_drift(RateKind kind, std::uint64_t replicas,
                                  double h, std::uint64_t seed) {
  const RateSpec spec(kind);
  const BathSpec baths(1.0, 2.0);
  const Topology topo = Topology::chain(4);
  double worst = 0.0;
  std::ostringstream detail;
  const std::uint64_t base = 100 + 1000 * static_cast<std::uint64_t>(kind);
  for (std::uint64_t s = 0; s < 5; ++s) {
    RngStream setup = derive_stream(seed, base + s);
    std::vector<double> energies(topo.sites());
    std::vector<double> coeffs(topo.sites());
    for (auto& e : energies) e = 0.2 + 2.8 * setup.uniform();
    for (auto& c : coeffs) c = 2.0 * setup.uniform() - 1.0;
    const SystemState start(topo, energies);
    const double expected = generator_drift_linear(coeffs, start, baths, spec);
    RngStream rng = derive_stream(seed, base + 100 + s);
    const DriftEstimate m =
        monte_carlo_drift(coeffs, start, baths, spec, h, replicas, rng);
    const double z = (m.mean - expected) / m.standard_error;
    worst = std::max(worst, std::abs(z));
    detail << (s ? " " : "") << "z" << s << "=" << z;
  }
  return {label("generator_drift", kind), worst, 3.0, worst <= 3.0,
          detail.str()};
}

CheckResult check_chi2_quantiles() {
  // Reference 95% quantiles, independent of this code base.
  const std::pair<int, double> ref[] = {
      {1, 3.841458820694124}, {16, 26.29622760486423},
      {28, 41.33713815142739}, {29, 42.55696780429269},
      {30, 43.77297182574219}, {256, 294.3206688843064}};
  double worst = 0.0;
  for (const auto& [dof, q] : ref) {
    worst = std::max(worst, std::abs(chi2_quantile(dof, 0.95) - q));
  }
  return {"chi2_quantiles", worst, 1e-6, worst <= 1e-6,
          "dof 1,16,28,29,30,256 at 95%"};
}

CheckResult check_gof_calibration(double shape, bool fitted,
                                  std::uint64_t reps, std::uint64_t samples,
                                  std::uint64_t seed) {
  const RateKind kind = shape == 1.0 ? RateKind::SumSqrt : RateKind::HarmonicSqrt;
  if (shape != 1.0 && shape != 0.5) {
    throw DomainError("check_gof_calibration: shape must be 1 or 1/2");
  }
  const double scale = kind == RateKind::SumSqrt ? 1.5 : 3.0;
  const BinEdges edges = marginal_gof_edges();
  std::uint64_t rejected = 0;
  std::vector<double> x(samples);
  for (std::uint64_t r = 0; r < reps; ++r) {
    RngStream rng = derive_stream(seed, 1000 + r);
    for (auto& v : x) v = sample_stationary(kind, scale, rng);
    const GammaFit fit = fitted ? gamma_mle(x) : GammaFit{shape, scale};
    if (!chisq_gof(x, fit, edges).pass) ++rejected;
  }
  const double size = static_cast<double>(rejected) / static_cast<double>(reps);
  return {fmt(fitted ? "gof_size_fitted/shape=%g" : "gof_size/shape=%g", shape),
          size, 0.02, std::abs(size - 0.05) <= 0.02,
          fmt("%g rejections of %g at the 95%% level", static_cast<double>(rejected),
              static_cast<double>(reps))};
}

CheckResult check_independence_calibration(std::uint64_t reps,
                                           std::uint64_t samples,
                                           std::uint64_t seed) {
  const BinEdges edges = independence_edges();
  std::uint64_t rejected = 0;
  for (std::uint64_t r = 0; r < reps; ++r) {
    RngStream rng = derive_stream(seed, 5000 + r);
    ContingencyTable table(edges, edges);
    for (std::uint64_t i = 0; i < samples; ++i) {
      const double x = rng.exponential(1.0);
      table.add(x, rng.exponential(1.0));
    }
    if (!independence_chisq(table).pass) ++rejected;
  }
  const double size = static_cast<double>(rejected) / static_cast<double>(reps);
  return {"independence_size", size, 0.02, std::abs(size - 0.05) <= 0.02,
          fmt("%g rejections of %g at the 95%% level", static_cast<double>(rejected),
              static_cast<double>(reps))};
}

std::vector<CheckResult> run_validation_suite(const ValidationOptions& o) {
  std::vector<CheckResult> out;
  out.push_back(check_chi2_quantiles());
  for (RateKind kind : {RateKind::SumSqrt, RateKind::HarmonicSqrt}) {
    out.push_back(check_balance_residual(kind));
    out.push_back(check_flux_quadrature(kind, o.seed));
    out.push_back(check_flux_monte_carlo(kind, o.flux_draws, o.seed));
    out.push_back(check_ring_equilibrium(kind, o.ring_samples, o.seed));
    out.push_back(check_generator_drift(kind, o.drift_replicas, o.drift_h, o.seed));
  }
  out.push_back(check_gof_calibration(1.0, false, o.calibration_reps,
                                      o.calibration_samples, o.seed));
  out.push_back(check_gof_calibration(0.5, false, o.calibration_reps,
                                      o.calibration_samples, o.seed));
  out.push_back(check_independence_calibration(o.calibration_reps,
                                               o.calibration_samples, o.seed));
  return out;
}

std::string validation_csv(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  out << "check,value,limit,pass,detail\n";
  for (const auto& r : results) {
    out << r.name << ',' << format_double(r.value) << ','
        << format_double(r.limit) << ',' << (r.pass ? "true" : "false") << ",\""
        << r.detail << "\"\n";
  }
  return out.str();
}

}  // namespace heatchain
