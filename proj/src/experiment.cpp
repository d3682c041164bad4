#include "heatchain/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "heatchain/errors.hpp"

namespace heatchain {

unsigned default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

std::uint64_t trajectory_index(std::size_t N, std::size_t M, std::uint64_t t) {
  return ((static_cast<std::uint64_t>(N) << 16 | static_cast<std::uint64_t>(M))
          << 24) +
         t;
}

Topology experiment_topology(const ExperimentConfig& cfg, std::size_t N,
                             std::size_t M) {
  switch (cfg.topology) {
    case TopologyKind::Chain1D:
      return Topology::chain(N);
    case TopologyKind::Lattice2D:
      return Topology::lattice(M, N);
    case TopologyKind::Ring:
      return Topology::ring(N);
  }
  return Topology::chain(N);
}

RunConfig make_run_config(const ExperimentConfig& cfg, const Topology& topo,
                          std::uint64_t trajectory) {
  RunConfig rc{topo, cfg.rate_spec(), cfg.bath_spec(), {}, 0.0, 0.0, 0, {}, 0,
               {}};
  rc.t_end = cfg.t_end;
  rc.burn_in = cfg.burn_in;
  rc.seed = cfg.seed;
  rc.skeleton_period = cfg.h;
  rc.trajectory = trajectory;
  rc.max_ticks = cfg.max_samples;
  return rc;
}

TrajectoryFlux run_flux_trajectory(const ExperimentConfig& cfg,
                                   const Topology& topo,
                                   std::uint64_t trajectory) {
  RunConfig rc = make_run_config(cfg, topo, trajectory);
  rc.skeleton_period.reset();
  FluxLedger ledger(enumerate_bonds(topo).size(), cfg.burn_in, cfg.t_end);
  Observer* observers[] = {&ledger};
  const RunReport report = run(rc, observers);
  return {trajectory, std::move(ledger), report.events};
}

ConductivityPoint reduce_conductivity(std::vector<TrajectoryFlux> parts,
                                      const BathSpec& baths,
                                      const Topology& topo,
                                      std::uint64_t seed) {
  if (parts.empty()) throw DomainError("reduce_conductivity: no trajectories");
  std::sort(parts.begin(), parts.end(),
            [](const TrajectoryFlux& a, const TrajectoryFlux& b) {
              return a.trajectory < b.trajectory;
            });
  FluxLedger pooled = parts.front().ledger;
  std::uint64_t events = parts.front().events;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    pooled.merge(parts[i].ledger);
    events += parts[i].events;
  }
  return {conductivity_estimate(pooled, baths, topo, seed), events,
          bond_flux_profile(pooled)};
}

std::vector<ConductivityPoint> conductivity_sweep(const ExperimentConfig& cfg,
                                                  bool over_widths,
                                                  unsigned threads) {
  if (cfg.topology == TopologyKind::Ring) {
    throw ConfigError("topology.kind: conductivity needs bath-coupled chains");
  }
  struct Point {
    std::size_t N;
    std::size_t M;
  };
  std::vector<Point> points;
  if (over_widths) {
    for (std::size_t M : cfg.widths()) points.push_back({cfg.N, M});
  } else {
    for (std::size_t N : cfg.chain_lengths()) points.push_back({N, cfg.M});
  }
  for (const Point& p : points) {
    if (p.N < 2) throw ConfigError("topology.N: need at least two sites");
  }

  const std::size_t per_point = cfg.trajectories;
  auto parts = run_ensemble(
      points.size() * per_point, threads, [&](std::size_t i) {
        const Point& p = points[i / per_point];
        const Topology topo = over_widths || cfg.topology == TopologyKind::Lattice2D
                                  ? Topology::lattice(p.M, p.N)
                                  : Topology::chain(p.N);
        return run_flux_trajectory(cfg, topo,
                                   trajectory_index(p.N, p.M, i % per_point));
      });

  std::vector<ConductivityPoint> out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    std::vector<TrajectoryFlux> group;
    for (std::size_t t = 0; t < per_point; ++t) {
      group.push_back(std::move(parts[k * per_point + t]));
    }
    const Topology topo = over_widths || cfg.topology == TopologyKind::Lattice2D
                              ? Topology::lattice(points[k].M, points[k].N)
                              : Topology::chain(points[k].N);
    out.push_back(reduce_conductivity(std::move(group), cfg.bath_spec(), topo,
                                      cfg.seed));
  }
  return out;
}

SkeletonSummary collect_skeleton(const ExperimentConfig& cfg, std::size_t N,
                                 SkeletonRequest request, unsigned threads) {
  if (!cfg.h) throw ConfigError("sampling.h: required for skeleton sampling");
  if (cfg.topology != TopologyKind::Chain1D) {
    throw ConfigError("topology.kind: skeleton statistics need a chain");
  }
  if (request.pair && N < 2) throw ConfigError("topology.N: need N >= 2");

  std::vector<std::size_t> sites;
  if (cfg.sites.empty()) {
    for (std::size_t i = 0; i < N; ++i) sites.push_back(i);
  } else {
    for (std::size_t s : cfg.sites) {
      if (s < 1 || s > N) throw ConfigError("sampling.sites: out of range");
      sites.push_back(s - 1);
    }
  }
  std::vector<std::size_t> all_sites(N);
  for (std::size_t i = 0; i < N; ++i) all_sites[i] = i;
  const Topology topo = Topology::chain(N);
  const std::size_t left = N / 2 - 1;

  struct Part {
    std::optional<MarginalAccumulator> marginals;
    std::optional<ProfileAccumulator> profile;
    std::optional<PairTableAccumulator> pair;
    std::uint64_t events;
    std::uint64_t ticks;
  };
  auto parts = run_ensemble(cfg.trajectories, threads, [&](std::size_t t) {
    const RunConfig rc = make_run_config(cfg, topo, trajectory_index(N, 1, t));
    Part part{};
    std::vector<Observer*> observers;
    if (request.marginals) {
      part.marginals.emplace(sites, marginal_gof_edges());
      observers.push_back(&*part.marginals);
    }
    if (request.profile) {
      part.profile.emplace(all_sites, rc.tick_count());
      observers.push_back(&*part.profile);
    }
    if (request.pair) {
      part.pair.emplace(left, left + 1, independence_edges());
      observers.push_back(&*part.pair);
    }
    const RunReport report = run(rc, observers);
    part.events = report.events;
    part.ticks = report.ticks;
    return part;
  });

  SkeletonSummary summary;
  summary.N = N;
  summary.sites = sites;
  for (auto& part : parts) {
    summary.events += part.events;
    summary.ticks += part.ticks;
    if (part.marginals) {
      if (summary.marginals) {
        summary.marginals->merge(*part.marginals);
      } else {
        summary.marginals = std::move(part.marginals);
      }
    }
    if (part.profile) {
      if (summary.profile) {
        summary.profile->merge(*part.profile);
      } else {
        summary.profile = std::move(part.profile);
      }
    }
    if (part.pair) {
      if (summary.pair) {
        summary.pair->merge(*part.pair);
      } else {
        summary.pair = std::move(part.pair);
      }
    }
  }
  return summary;
}

std::vector<MarginalRow> analyze_marginals(const MarginalAccumulator& acc) {
  std::vector<MarginalRow> rows;
  for (std::size_t c = 0; c < acc.sites().size(); ++c) {
    const GammaFit fit = gamma_mle(acc.stats(c));
    const auto report = chisq_gof_counts(
        acc.counts(c), acc.edges(),
        [&fit](double x) { return gamma_cdf(fit, x); }, 2);
    rows.push_back({acc.sites()[c] + 1, fit, report});
  }
  return rows;
}

ProfileComparison analyze_profile(const ProfileAccumulator& profile,
                                  RateKind kind, std::size_t left_anchor,
                                  std::size_t right_anchor) {
  const std::size_t N = profile.sites().size();
  for (std::size_t i = 0; i < N; ++i) {
    if (profile.sites()[i] != i) {
      throw DomainError("analyze_profile: profile must cover every site");
    }
  }
  if (left_anchor < 1 || right_anchor > N || left_anchor + 1 >= right_anchor) {
    throw ConfigError("analysis.anchors: need 1 <= left < right - 1 <= N - 1");
  }
  const EnergyProfile empirical = profile.profile();
  ProfileComparison out{
      {},
      predicted_profile(kind, empirical.mean[left_anchor - 1],
                        empirical.mean[right_anchor - 1],
                        right_anchor - left_anchor - 1),
      left_anchor,
      right_anchor};
  for (std::size_t i = 0; i < N; ++i) {
    ProfileRow row{i + 1, empirical.mean[i], empirical.standard_error[i],
                   std::nullopt};
    const std::size_t site = i + 1;
    if (site >= left_anchor && site <= right_anchor) {
      row.predicted_mean = out.predicted.mean_energies[site - left_anchor];
    }
    out.rows.push_back(row);
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string conductivity_csv(RateKind kind, double t_end, std::uint64_t seed,
                             const std::vector<ConductivityPoint>& points) {
  std::ostringstream out;
  out << "rate_kind,N,M,T_end,kappa,q,stderr,events,seed\n";
  for (const auto& p : points) {
    out << to_string(kind) << ',' << p.estimate.N << ',' << p.estimate.M << ','
        << format_double(t_end) << ',' << format_double(p.estimate.kappa)
        << ',' << format_double(p.estimate.q) << ','
        << format_double(p.estimate.q_stderr) << ',' << p.events << ','
        << seed << '\n';
  }
  return out.str();
}

std::string marginals_csv(const std::vector<MarginalRow>& rows) {
  std::ostringstream out;
  out << "site,alpha,theta,chi2,dof,threshold,pass\n";
  for (const auto& r : rows) {
    out << r.site << ',' << format_double(r.fit.shape) << ','
        << format_double(r.fit.scale) << ',' << format_double(r.gof.statistic)
        << ',' << r.gof.dof << ',' << format_double(r.gof.threshold) << ','
        << (r.gof.pass ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string profile_csv(const ProfileComparison& comparison) {
  std::ostringstream out;
  out << "site,empirical_mean,empirical_se,predicted_mean\n";
  for (const auto& r : comparison.rows) {
    out << r.site << ',' << format_double(r.empirical_mean) << ','
        << format_double(r.empirical_se) << ',';
    if (r.predicted_mean) out << format_double(*r.predicted_mean);
    out << '\n';
  }
  return out.str();
}

std::string independence_csv(const std::vector<IndependencePoint>& points) {
  std::ostringstream out;
  out << "N,chi2,dof,threshold,sqrt_chi2\n";
  for (const auto& p : points) {
    out << p.N << ',' << format_double(p.report.statistic) << ','
        << p.report.dof << ',' << format_double(p.report.threshold) << ','
        << format_double(std::sqrt(p.report.statistic)) << '\n';
  }
  return out.str();
}

namespace {

std::filesystem::path write_file(const ExperimentConfig& cfg,
                                 const std::string& name,
                                 const std::string& contents) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / (cfg.prefix + name);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  return path;
}

}  // namespace

std::vector<std::filesystem::path> run_experiment(
    const std::string& subcommand, const ExperimentConfig& cfg,
    const RunOptions& options, std::ostream& log) {
  const unsigned threads =
      options.threads == 0 ? default_threads() : options.threads;
  std::vector<std::filesystem::path> written;

  if (subcommand == "conductivity-1d" || subcommand == "conductivity-2d") {
    const bool widths = subcommand == "conductivity-2d";
    if (widths && cfg.N < 2) throw ConfigError("topology.N: required for 2D");
    const auto points = conductivity_sweep(cfg, widths, threads);
    for (const auto& p : points) {
      log << subcommand << " N=" << p.estimate.N << " M=" << p.estimate.M
          << " q=" << p.estimate.q << " +- " << p.estimate.q_stderr
          << " events=" << p.events << '\n';
    }
    written.push_back(write_file(
        cfg, subcommand + ".csv",
        conductivity_csv(cfg.rate_kind, cfg.t_end, cfg.seed, points)));
  } else if (subcommand == "marginals") {
    const auto summary =
        collect_skeleton(cfg, cfg.N, {.marginals = true}, threads);
    const auto rows = analyze_marginals(*summary.marginals);
    log << "marginals N=" << cfg.N << " samples=" << summary.ticks
        << " events=" << summary.events << '\n';
    written.push_back(write_file(cfg, "marginals.csv", marginals_csv(rows)));
  } else if (subcommand == "profile") {
    const auto summary =
        collect_skeleton(cfg, cfg.N, {.profile = true}, threads);
    // Default anchors: fifth site from either end, or the end sites of a
    // short chain.
    std::size_t left = cfg.N >= 12 ? 5 : 1;
    std::size_t right = cfg.N >= 12 ? cfg.N - 4 : cfg.N;
    if (cfg.anchors) {
      left = (*cfg.anchors)[0];
      right = (*cfg.anchors)[1];
    }
    const auto comparison =
        analyze_profile(*summary.profile, cfg.rate_kind, left, right);
    log << "profile N=" << cfg.N << " anchors=" << left << "," << right
        << " flux=" << comparison.predicted.flux << '\n';
    written.push_back(write_file(cfg, "profile.csv", profile_csv(comparison)));
  } else if (subcommand == "independence") {
    std::vector<IndependencePoint> points;
    std::vector<std::pair<double, double>> extrapolation_input;
    for (std::size_t N : cfg.chain_lengths()) {
      const auto summary = collect_skeleton(cfg, N, {.pair = true}, threads);
      points.push_back({N, independence_chisq(summary.pair->table())});
      extrapolation_input.emplace_back(static_cast<double>(N),
                                       points.back().report.statistic);
      log << "independence N=" << N << " chi2=" << points.back().report.statistic
          << " samples=" << summary.ticks << '\n';
    }
    written.push_back(
        write_file(cfg, "independence.csv", independence_csv(points)));
    if (extrapolation_input.size() >= 3) {
      const auto fit = extrapolate_chisq(extrapolation_input, 256);
      nlohmann::ordered_json summary = {
          {"intercept", fit.intercept},      {"slope", fit.slope},
          {"intercept_se", fit.intercept_se}, {"ci_low", fit.ci_low},
          {"ci_high", fit.ci_high},          {"sqrt_p95", fit.sqrt_threshold},
          {"pass", fit.pass}};
      written.push_back(write_file(cfg, "independence_summary.json",
                                   summary.dump(2) + "\n"));
    }
  } else {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  return written;
}

}  // namespace heatchain
