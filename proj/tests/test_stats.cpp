#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "heatchain/errors.hpp"
#include "heatchain/rng.hpp"
#include "heatchain/stats.hpp"
#include "heatchain/validation.hpp"

using namespace heatchain;

namespace {

std::vector<double> draw(RateKind kind, double T, std::size_t n, std::uint64_t seed) {
  RngStream rng = derive_stream(seed, 0);
  std::vector<double> x(n);
  for (auto& v : x) v = sample_stationary(kind, T, rng);
  return x;
}

}  // namespace

TEST_CASE("flux vanishes at equal temperatures") {
  for (RateKind k : {RateKind::SumSqrt, RateKind::HarmonicSqrt}) {
    for (double T : {0.3, 1.0, 4.0}) CHECK(theoretical_flux(k, T, T) == 0.0);
  }
  CHECK_THROWS_AS(theoretical_flux(RateKind::CappedMinSqrt, 1, 2), DomainError);
}

TEST_CASE("flux closed forms against frozen quadrature values") {
  // Independent two-dimensional quadrature of E[R(x,y)(y-x)/2] under the
  // product law, computed outside this code base.
  CHECK(theoretical_flux(RateKind::SumSqrt, 1, 2) ==
        doctest::Approx(1.1838099076795843).epsilon(1e-10));
  CHECK(theoretical_flux(RateKind::HarmonicSqrt, 1, 2) ==
        doctest::Approx(0.10267151116317823).epsilon(1e-10));
  // Antisymmetry.
  CHECK(theoretical_flux(RateKind::SumSqrt, 2, 1) ==
        doctest::Approx(-1.1838099076795843).epsilon(1e-10));
}

TEST_CASE("flux closed forms against in-repo quadrature") {
  for (RateKind k : {RateKind::SumSqrt, RateKind::HarmonicSqrt}) {
    const auto r = check_flux_quadrature(k, 31);
    INFO(r.name << " worst relative difference " << r.value);
    CHECK(r.pass);
  }
}

TEST_CASE("flux closed forms against Monte Carlo") {
  for (RateKind k : {RateKind::SumSqrt, RateKind::HarmonicSqrt}) {
    const auto r = check_flux_monte_carlo(k, 2'000'000, 32);
    INFO(r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("pair balance") {
  CHECK(std::abs(pair_balance_residual(RateKind::SumSqrt, 1, 0.7, 1.9)) <= 1e-8);
  CHECK(std::abs(pair_balance_residual(RateKind::HarmonicSqrt, 2, 0.3, 0.4)) <= 1e-8);
  for (RateKind k : {RateKind::SumSqrt, RateKind::HarmonicSqrt}) {
    CHECK(check_balance_residual(k).pass);
  }
  // Mismatched temperatures are not invariant: the check has teeth.
  double worst = 0.0;
  for (double e1 : {0.2, 0.7, 1.5, 3.0}) {
    for (double e2 : {0.2, 0.7, 1.5, 3.0}) {
      worst = std::max(worst, std::abs(pair_balance_residual(
                                  RateKind::SumSqrt, 1.0, 2.0, e1, e2)));
    }
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("mean energy and temperature") {
  CHECK(temperature_from_mean(RateKind::SumSqrt, 1.5) == 1.5);
  CHECK(temperature_from_mean(RateKind::HarmonicSqrt, 1.5) == 3.0);
  CHECK(mean_from_temperature(RateKind::HarmonicSqrt, 3.0) == 1.5);
}

TEST_CASE("gamma MLE: input errors") {
  CHECK_THROWS_AS(gamma_mle(std::vector<double>(500, 2.0)), AnalysisError);
  std::vector<double> x = draw(RateKind::SumSqrt, 1.0, 500, 1);
  x[3] = -1.0;
  CHECK_THROWS_AS(gamma_mle(x), DomainError);
  x[3] = 0.0;
  CHECK_THROWS_AS(gamma_mle(x), DomainError);
}

TEST_CASE("gamma MLE: exponential samples") {
  const GammaFit fit = gamma_mle(draw(RateKind::SumSqrt, 1.0, 1'000'000, 2));
  CHECK(fit.shape >= 0.99);
  CHECK(fit.shape <= 1.01);
  CHECK(fit.scale >= 0.98);
  CHECK(fit.scale <= 1.02);
}

TEST_CASE("gamma MLE: shape one half") {
  const auto x = draw(RateKind::HarmonicSqrt, 2.0, 1'000'000, 3);
  const GammaFit fit = gamma_mle(x);
  CHECK(fit.shape >= 0.495);
  CHECK(fit.shape <= 0.505);
  CHECK(fit.scale >= 1.96);
  CHECK(fit.scale <= 2.04);
  // Score equation: log a - digamma(a) = log(mean) - mean(log x).
  double s = 0.0, sl = 0.0;
  for (double v : x) {
    s += v;
    sl += std::log(v);
  }
  const double n = static_cast<double>(x.size());
  const double rhs = std::log(s / n) - sl / n;
  CHECK(std::log(fit.shape) - boost::math::digamma(fit.shape) ==
        doctest::Approx(rhs).epsilon(1e-7));
  CHECK(fit.mean() == doctest::Approx(s / n).epsilon(1e-12));
}

TEST_CASE("gamma sufficient statistics merge") {
  const auto x = draw(RateKind::SumSqrt, 1.3, 5000, 4);
  GammaSufficientStats all, a, b;
  for (std::size_t i = 0; i < x.size(); ++i) {
    all.add(x[i]);
    (i % 3 ? a : b).add(x[i]);
  }
  a.merge(b);
  const GammaFit f1 = gamma_mle(all);
  const GammaFit f2 = gamma_mle(a);
  CHECK(f1.shape == doctest::Approx(f2.shape).epsilon(1e-10));
  CHECK(f1.scale == doctest::Approx(f2.scale).epsilon(1e-10));
}

TEST_CASE("chi-square quantiles") {
  CHECK(chi2_quantile(1, 0.95) == doctest::Approx(3.8414588).epsilon(1e-8));
  CHECK(chi2_quantile(30, 0.95) == doctest::Approx(43.7729718).epsilon(1e-8));
  const double q256 = chi2_quantile(256, 0.95);
  CHECK(q256 == doctest::Approx(294.3206689).epsilon(1e-8));
  // Wilson-Hilferty: k (1 - 2/(9k) + z sqrt(2/(9k)))^3.
  const double k = 256, z = 1.6448536269514722;
  const double wh = k * std::pow(1 - 2 / (9 * k) + z * std::sqrt(2 / (9 * k)), 3);
  CHECK(std::abs(q256 - wh) < 0.5);
  for (int dof : {1, 2, 16, 28, 256}) {
    for (double q : {0.01, 0.5, 0.95, 0.99}) {
      CHECK(chi2_cdf(dof, chi2_quantile(dof, q)) == doctest::Approx(q).epsilon(1e-8));
    }
  }
  CHECK(check_chi2_quantiles().pass);
  CHECK_THROWS_AS(chi2_quantile(0, 0.5), DomainError);
  CHECK_THROWS_AS(chi2_quantile(3, 1.0), DomainError);
}

TEST_CASE("bin edges") {
  const BinEdges m = marginal_gof_edges();
  CHECK(m.size() == 32);  // 31 bins
  CHECK(m[30] == doctest::Approx(6.0));
  CHECK(std::isinf(m.back()));
  const BinEdges ind = independence_edges();
  CHECK(ind.size() == 18);  // 17 bins
  CHECK(ind[16] == doctest::Approx(1.6));
  CHECK(bin_index(m, 0.0) == 0);
  CHECK(bin_index(m, 0.2) == 1);
  CHECK(bin_index(m, 1e9) == 30);
  CHECK_THROWS_AS(validate_edges(std::vector<double>{0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(validate_edges(std::vector<double>{0.0, 2.0, 1.0, INFINITY}),
                  DomainError);
}

TEST_CASE("GOF: counts equal to expectations give zero") {
  const std::vector<double> edges{0.0, 1.0, 2.0, INFINITY};
  const std::vector<std::uint64_t> counts{25, 25, 50};
  const auto r = chisq_gof_counts(counts, edges, [](double x) {
    return std::isinf(x) ? 1.0 : std::min(x / 4.0, 1.0);
  });
  CHECK(r.statistic == 0.0);
  CHECK(r.dof == 2);
  CHECK(r.pass);
}

TEST_CASE("GOF: sparse bins are merged") {
  const std::vector<double> edges{0.0, 1.0, 2.0, 3.0, INFINITY};
  const std::vector<std::uint64_t> counts{50, 46, 3, 1};
  const auto r = chisq_gof_counts(counts, edges, [](double x) {
    return std::isinf(x) ? 1.0 : 0.32 * std::min(x, 3.0);
  });
  // Expected counts 32, 32, 32, 4: the tail folds into the last kept bin.
  CHECK(r.merged_bins == 1);
  CHECK(r.dof == 2);
}

TEST_CASE("GOF: power against the wrong shape") {
  const auto x = draw(RateKind::HarmonicSqrt, 2.0, 1'000'000, 5);
  const auto r = chisq_gof(x, GammaFit{1.0, 1.0}, marginal_gof_edges());
  CHECK_FALSE(r.pass);
  CHECK(r.statistic > 100.0 * r.threshold);
}

TEST_CASE("GOF: fitted Gamma(1,1) passes in at least 90% of repetitions") {
  const BinEdges edges = marginal_gof_edges();
  int passed = 0;
  const int reps = 100;
  std::vector<double> x(1'000'000);
  for (int r = 0; r < reps; ++r) {
    RngStream rng = derive_stream(6, r);
    for (auto& v : x) v = rng.exponential(1.0);
    if (chisq_gof(x, gamma_mle(x), edges).pass) ++passed;
  }
  CHECK(passed >= 90);
}

TEST_CASE("GOF and independence sizes are calibrated") {
  for (double shape : {1.0, 0.5}) {
    const auto r = check_gof_calibration(shape, false, 400, 20'000, 7);
    INFO(r.name << ": " << r.detail);
    CHECK(r.pass);
  }
  const auto r = check_independence_calibration(400, 20'000, 8);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("independence: exact product table gives zero") {
  const BinEdges e{0.0, 1.0, 2.0, INFINITY};
  ContingencyTable t(e, e);
  const std::uint64_t row[] = {10, 20, 30};
  const std::uint64_t col[] = {2, 3, 5};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t.at(i, j) = row[i] * col[j];
  }
  t.set_total_from_counts();
  const auto r = independence_chisq(t);
  CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.dof == 4);
}

TEST_CASE("independence: perfectly correlated pairs") {
  const auto x = draw(RateKind::SumSqrt, 1.0, 100'000, 9);
  const auto r = independence_chisq(x, x, independence_edges());
  CHECK(r.dof == 256);
  CHECK(r.statistic > 100.0 * r.threshold);
  CHECK_FALSE(r.pass);
}

TEST_CASE("independence: independent Gamma pairs pass") {
  int passed = 0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    RngStream rng = derive_stream(10, r);
    ContingencyTable t(independence_edges(), independence_edges());
    for (int i = 0; i < 10'000'000; ++i) {
      const double x = sample_stationary(RateKind::HarmonicSqrt, 1.4, rng);
      t.add(x, sample_stationary(RateKind::HarmonicSqrt, 2.2, rng));
    }
    if (independence_chisq(t).pass) ++passed;
  }
  CHECK(passed >= 9);
}

TEST_CASE("independence: empty marginal bins are merged") {
  const BinEdges e{0.0, 1.0, 2.0, 3.0, INFINITY};
  std::vector<double> x, y;
  RngStream rng(11);
  for (int i = 0; i < 5000; ++i) {
    x.push_back(rng.uniform() * 2.0);  // bins 3, 4 stay empty
    y.push_back(rng.uniform() * 4.0);
  }
  const auto r = independence_chisq(x, y, e);
  CHECK(r.dof == 3);  // (2 - 1) x (4 - 1)
}

TEST_CASE("extrapolation") {
  SUBCASE("exact line") {
    const std::vector<std::pair<double, double>> p{
        {10, std::pow(2.0 + 30.0 / 10, 2)},
        {20, std::pow(2.0 + 30.0 / 20, 2)},
        {40, std::pow(2.0 + 30.0 / 40, 2)}};
    const auto e = extrapolate_chisq(p);
    CHECK(e.intercept == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.slope == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(e.sqrt_threshold == doctest::Approx(std::sqrt(294.3206689)));
    CHECK(e.pass);
  }
  SUBCASE("constant") {
    const std::vector<std::pair<double, double>> p{{10, 400}, {20, 400}, {60, 400}};
    const auto e = extrapolate_chisq(p);
    CHECK(e.intercept == doctest::Approx(20.0));
    CHECK_FALSE(e.pass);
  }
  SUBCASE("noisy synthetic line: intercept inside its interval") {
    RngStream rng(12);
    int covered = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      std::vector<std::pair<double, double>> p;
      for (double n : {10.0, 20.0, 30.0, 40.0, 60.0, 80.0}) {
        const double u1 = rng.uniform(), u2 = rng.uniform();
        const double z = std::sqrt(-2 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        p.emplace_back(n, std::pow(5.0 + 40.0 / n + 0.2 * z, 2));
      }
      const auto e = extrapolate_chisq(p);
      covered += e.ci_low <= 5.0 && 5.0 <= e.ci_high;
    }
    // 95% interval: coverage 190 +- 3 sd.
    CHECK(covered >= 180);
  }
  CHECK_THROWS_AS(extrapolate_chisq(std::vector<std::pair<double, double>>{
                      {10, 1}, {10, 2}, {20, 3}}),
                  AnalysisError);
}

TEST_CASE("profile: equal anchors are flat") {
  const auto p = predicted_profile(RateKind::SumSqrt, 1.5, 1.5, 5);
  CHECK(p.flux == 0.0);
  for (double m : p.mean_energies) CHECK(m == 1.5);
  CHECK(p.mean_energies.size() == 7);
}

TEST_CASE("profile: one interior site against an independent root-finder") {
  for (RateKind k : {RateKind::SumSqrt, RateKind::HarmonicSqrt}) {
    const double Tl = temperature_from_mean(k, 1.0);
    const double Tr = temperature_from_mean(k, 2.0);
    auto g = [&](double T) {
      return theoretical_flux(k, Tl, T) - theoretical_flux(k, T, Tr);
    };
    boost::math::tools::eps_tolerance<double> tol(45);
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(g, Tl, Tr, tol, iters);
    const double oracle = 0.5 * (lo + hi);
    const auto p = predicted_profile(k, 1.0, 2.0, 1);
    REQUIRE(p.temperatures.size() == 3);
    CHECK(p.temperatures[1] == doctest::Approx(oracle).epsilon(1e-7));
    CHECK(p.flux == doctest::Approx(theoretical_flux(k, Tl, oracle)).epsilon(1e-6));
  }
}

TEST_CASE("profile: constant flux along thirty interior sites") {
  for (RateKind k : {RateKind::SumSqrt, RateKind::HarmonicSqrt}) {
    const auto p = predicted_profile(k, 1.1, 1.9, 30);
    REQUIRE(p.temperatures.size() == 32);
    for (std::size_t i = 0; i + 1 < p.temperatures.size(); ++i) {
      CHECK(theoretical_flux(k, p.temperatures[i], p.temperatures[i + 1]) ==
            doctest::Approx(p.flux).epsilon(1e-6));
      CHECK(p.temperatures[i + 1] > p.temperatures[i]);
    }
    CHECK(p.mean_energies.front() == doctest::Approx(1.1));
    CHECK(p.mean_energies.back() == doctest::Approx(1.9).epsilon(1e-7));
  }
}
