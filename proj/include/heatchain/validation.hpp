#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heatchain/model.hpp"
#include "heatchain/rng.hpp"

namespace heatchain {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
  std::string detail;
};

struct ValidationOptions {
  std::uint64_t seed = 20240601;
  std::uint64_t flux_draws = 10'000'000;
  std::uint64_t ring_samples = 1'000'000;
  std::uint64_t drift_replicas = 1'000'000;
  double drift_h = 1e-3;
  std::uint64_t calibration_reps = 400;
  std::uint64_t calibration_samples = 100'000;
};

struct DriftEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Sample mean of (f(X_h) - f(x)) / h over independent replicas started at
/// `start`, for f(E) = sum_i coeffs[i] E_i.
DriftEstimate monte_carlo_drift(std::span<const double> coeffs,
                                const SystemState& start, const BathSpec& baths,
                                const RateSpec& spec, double h,
                                std::uint64_t replicas, RngStream& rng);

/// max |inflow - outflow| over a 10 x 10 energy grid at T in {0.5, 1, 2}.
CheckResult check_balance_residual(RateKind kind);

/// Closed-form flux against quadrature on 20 random pairs in [0.5, 4]^2;
/// value is the largest relative difference.
CheckResult check_flux_quadrature(RateKind kind, std::uint64_t seed);

/// Closed-form flux against a sample mean of R(x, y) (y - x) / 2 under the
/// product law; value is the largest |z| over a few temperature pairs.
CheckResult check_flux_monte_carlo(RateKind kind, std::uint64_t draws,
                                   std::uint64_t seed);

/// Ring of 8 sites, each starting at energy 1. The skeleton law of
/// E_1 / S is Beta(1, 7) (SumSqrt) or Beta(1/2, 7/2) (HarmonicSqrt);
/// 30 equiprobable bins, 1% level.
CheckResult check_ring_equilibrium(RateKind kind, std::uint64_t samples,
                                   std::uint64_t seed);

/// Short-time Monte Carlo drift (f(X_h) - f(x)) / h of a random linear
/// observable on a 4-site chain against generator_drift_linear, 5 random
/// states; value is the largest |z|.
CheckResult check_generator_drift(RateKind kind, std::uint64_t replicas,
                                  double h, std::uint64_t seed);

/// chi2_quantile against frozen reference values.
CheckResult check_chi2_quantiles();

/// Rejection rate of the 31-bin GOF test (dof 30, 95%) on exact Gamma
/// samples with the generating parameters. `fitted` refits shape and scale
/// by maximum likelihood first, which makes the test conservative.
CheckResult check_gof_calibration(double shape, bool fitted,
                                  std::uint64_t reps, std::uint64_t samples,
                                  std::uint64_t seed);

/// Rejection rate of the 17 x 17 independence test on independent pairs.
CheckResult check_independence_calibration(std::uint64_t reps,
                                           std::uint64_t samples,
                                           std::uint64_t seed);

std::vector<CheckResult> run_validation_suite(const ValidationOptions& options);

std::string validation_csv(const std::vector<CheckResult>& results);

/// Gamma(shape, scale) variate for shape 1 (exponential) or 1/2 (half a
/// squared normal).
double sample_stationary(RateKind kind, double T, RngStream& rng);

}  // namespace heatchain
