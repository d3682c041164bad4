#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "heatchain/model.hpp"

namespace heatchain {

// ---------------------------------------------------------------------------
// Flux under local equilibrium
// ---------------------------------------------------------------------------

/// Mean energy flux from a site at temperature parameter `T_hat` to its left
/// neighbour at `T`, when the pair is distributed as the product of the
/// single-site equilibrium laws: Exp(mean T) for SumSqrt, Gamma(1/2, scale T)
/// for HarmonicSqrt. Closed forms. Positive when T_hat > T.
double theoretical_flux(RateKind kind, double T, double T_hat);

/// The same expectation, E[R(x, y) (y - x) / 2], by adaptive two-dimensional
/// Gauss-Kronrod quadrature in the coordinates v = x + y, u = y - x = v cos(t).
/// The angle substitution absorbs the x^{-1/2} y^{-1/2} endpoint singularity
/// of the Gamma(1/2) density. Independent of theoretical_flux.
double theoretical_flux_quadrature(RateKind kind, double T, double T_hat);

/// Single-site equilibrium density: exponential with mean T (SumSqrt) or
/// Gamma with shape 1/2 and scale T (HarmonicSqrt).
double stationary_density(RateKind kind, double T, double e);

/// Probability flux into (e1, e2) minus flux out of (e1, e2) for a single
/// exchange bond whose sites carry independent stationary laws with
/// temperature parameters T_first and T_second. The inflow integral runs
/// over all pre-images (x, S - x), S = e1 + e2, each landing with density
/// 1/S; it is evaluated with x = S sin^2(phi). Zero for matching
/// temperatures; throws AnalysisError if the quadrature does not converge.
double pair_balance_residual(RateKind kind, double T_first, double T_second,
                             double e1, double e2);

inline double pair_balance_residual(RateKind kind, double T, double e1,
                                    double e2) {
  return pair_balance_residual(kind, T, T, e1, e2);
}

/// Temperature parameter of the equilibrium law with the given mean energy
/// (T = mean for SumSqrt, T = 2 mean for HarmonicSqrt), and its inverse.
double temperature_from_mean(RateKind kind, double mean);
double mean_from_temperature(RateKind kind, double T);

// ---------------------------------------------------------------------------
// Gamma fitting
// ---------------------------------------------------------------------------

/// Shape-scale parametrization: density x^{a-1} e^{-x/theta} /
/// (Gamma(a) theta^a), mean a * theta.
struct GammaFit {
  double shape;
  double scale;
  int iterations = 0;

  double mean() const { return shape * scale; }
};

/// Streaming sufficient statistics for Gamma maximum likelihood.
struct GammaSufficientStats {
  std::uint64_t count = 0;
  double sum = 0.0;
  double sum_log = 0.0;
  double sum_sq = 0.0;

  void add(double x);
  void merge(const GammaSufficientStats& other);

  double mean() const { return sum / static_cast<double>(count); }
  double mean_log() const { return sum_log / static_cast<double>(count); }
  double variance() const;
};

/// Maximum-likelihood Gamma fit by safeguarded Newton iteration on
/// ln(a) - digamma(a) = ln(mean) - mean(ln x), started from the moment
/// estimate a0 = mean^2 / variance and stopped when |da| <= 1e-8 a.
GammaFit gamma_mle(std::span<const double> samples);
GammaFit gamma_mle(const GammaSufficientStats& stats);

double gamma_log_likelihood(const GammaSufficientStats& stats, double shape,
                            double scale);
double gamma_cdf(const GammaFit& fit, double x);

// ---------------------------------------------------------------------------
// Chi-square tests
// ---------------------------------------------------------------------------

/// Bin edges e_0 < e_1 < ... < e_k = +inf; bin i is [e_i, e_{i+1}).
using BinEdges = std::vector<double>;

/// [0, 0.2), [0.2, 0.4), ..., [5.8, 6.0), [6.0, inf): 31 bins.
BinEdges marginal_gof_edges();
/// [0, 0.1), ..., [1.5, 1.6), [1.6, inf): 17 bins.
BinEdges independence_edges();

void validate_edges(std::span<const double> edges);
/// Index of the bin containing x (values below e_0 go to bin 0).
std::size_t bin_index(std::span<const double> edges, double x);
std::vector<std::uint64_t> histogram(std::span<const double> samples,
                                     std::span<const double> edges);

struct ChiSquareReport {
  double statistic = 0.0;
  int dof = 0;
  double threshold = 0.0;  // quantile of chi2(dof) at the test level
  bool pass = false;       // statistic < threshold
  std::vector<std::uint64_t> observed;  // after merging
  std::vector<double> expected;         // after merging
  std::size_t merged_bins = 0;          // bins absorbed by merging
  // dof reduced by the number of estimated parameters, with its threshold.
  int reduced_dof = 0;
  double reduced_threshold = 0.0;
};

/// Minimum expected count per bin; sparser bins are merged into a
/// neighbour and the degrees of freedom reduced accordingly.
inline constexpr double kMinExpectedCount = 5.0;

/// Pearson goodness of fit of binned counts against a CDF. Degrees of
/// freedom are (bins after merging) - 1; `estimated_parameters` only
/// affects the reduced_* fields.
ChiSquareReport chisq_gof_counts(std::span<const std::uint64_t> counts,
                                 std::span<const double> edges,
                                 const std::function<double(double)>& cdf,
                                 int estimated_parameters = 0,
                                 double level = 0.95);

ChiSquareReport chisq_gof(std::span<const double> samples, const GammaFit& fit,
                          std::span<const double> edges, double level = 0.95);

/// Two-way table of joint bin counts.
class ContingencyTable {
 public:
  ContingencyTable(BinEdges row_edges, BinEdges column_edges);

  void add(double x, double y);
  void merge(const ContingencyTable& other);

  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return columns_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t at(std::size_t r, std::size_t c) const {
    return counts_[r * columns_ + c];
  }
  std::uint64_t& at(std::size_t r, std::size_t c) {
    return counts_[r * columns_ + c];
  }
  void set_total_from_counts();

 private:
  BinEdges row_edges_;
  BinEdges column_edges_;
  std::size_t rows_;
  std::size_t columns_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Pearson independence statistic sum (O_ij - E_ij)^2 / E_ij with
/// E_ij = O_i O_j / N. Empty marginal rows/columns are merged into a
/// neighbour; dof = (rows - 1)(columns - 1) after merging.
ChiSquareReport independence_chisq(const ContingencyTable& table,
                                   double level = 0.95);
ChiSquareReport independence_chisq(std::span<const double> first,
                                   std::span<const double> second,
                                   std::span<const double> edges,
                                   double level = 0.95);

struct Extrapolation {
  double intercept = 0.0;  // sqrt(chi2) at 1/N = 0
  double slope = 0.0;
  double intercept_se = 0.0;
  double ci_low = 0.0;  // 95% confidence interval of the intercept
  double ci_high = 0.0;
  double sqrt_threshold = 0.0;  // sqrt of the chi2(dof) 95% quantile
  bool pass = false;            // intercept < sqrt_threshold
};

/// Least-squares line of sqrt(chi2_N) against 1/N over (N, chi2_N) points.
/// Needs at least three distinct N.
Extrapolation extrapolate_chisq(std::span<const std::pair<double, double>> points,
                                int dof = 256);

double chi2_cdf(int dof, double x);
/// Inverse of chi2_cdf by bisection, absolute tolerance 1e-8.
double chi2_quantile(int dof, double q);

// ---------------------------------------------------------------------------
// Constant-flux profile
// ---------------------------------------------------------------------------

struct TemperatureProfile {
  RateKind kind;
  /// Anchor, n interior sites, anchor: n + 2 entries.
  std::vector<double> temperatures;
  std::vector<double> mean_energies;
  double flux = 0.0;  // common bond flux
};

/// Temperatures of `interior` sites between two anchors (given as mean
/// energies) such that every bond carries the same theoretical_flux.
/// Shooting on the common flux: each step solves J(T_i, T_{i+1}) = J* for
/// T_{i+1} by bisection; an outer bisection on J* hits the right anchor.
TemperatureProfile predicted_profile(RateKind kind, double left_mean,
                                     double right_mean, std::size_t interior);

}  // namespace heatchain
