#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "heatchain/errors.hpp"
#include "heatchain/stats.hpp"

namespace heatchain {

namespace {

using boost::math::quadrature::gauss_kronrod;
constexpr double kPi = std::numbers::pi;

void require_flux_kind(RateKind kind, const char* where) {
  if (kind == RateKind::CappedMinSqrt) {
    throw DomainError(std::string(where) +
                      ": no product equilibrium for capped-min-sqrt");
  }
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

double theoretical_flux(RateKind kind, double T, double T_hat) {
  require_flux_kind(kind, "theoretical_flux");
  require_positive(T, "temperature");
  require_positive(T_hat, "temperature");
  const double a = std::sqrt(T);
  const double b = std::sqrt(T_hat);
  const double cube = (a + b) * (a + b) * (a + b);
  if (kind == RateKind::SumSqrt) {
    const double poly = 3.0 * T * T + 9.0 * T * a * b + 11.0 * T * T_hat +
                        9.0 * a * T_hat * b + 3.0 * T_hat * T_hat;
    return std::sqrt(kPi) * poly / (8.0 * cube) * (T_hat - T);
  }
  return a * b * (T + 3.0 * a * b + T_hat) / (4.0 * std::sqrt(kPi) * cube) *
         (T_hat - T);
}

double theoretical_flux_quadrature(RateKind kind, double T, double T_hat) {
  require_flux_kind(kind, "theoretical_flux_quadrature");
  require_positive(T, "temperature");
  require_positive(T_hat, "temperature");

  // x = v (1 - cos t) / 2, y = v (1 + cos t) / 2, dx dy = v sin(t) / 2 dt dv.
  auto inner = [&](double v) {
    auto integrand = [&](double t) {
      const double c = std::cos(t);
      const double s = std::sin(t);
      const double x = 0.5 * v * (1.0 - c);
      const double y = 0.5 * v * (1.0 + c);
      const double weight = std::exp(-x / T - y / T_hat);
      const double u = v * c;
      if (kind == RateKind::SumSqrt) {
        return 0.5 * u * std::sqrt(v) * weight / (T * T_hat) * 0.5 * v * s;
      }
      // Gamma(1/2) densities carry (x y)^{-1/2} = 2 / (v sin t), which
      // cancels the Jacobian; sqrt(x y / v) = v sin(t) / (2 sqrt(v)).
      const double rate = 0.5 * v * s / std::sqrt(v);
      return 0.5 * u * rate * weight / (kPi * std::sqrt(T * T_hat));
    };
    return gauss_kronrod<double, 31>::integrate(integrand, 0.0, kPi, 15,
                                                1e-12);
  };
  double error = 0.0;
  const double value = gauss_kronrod<double, 61>::integrate(
      inner, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-11, &error);
  if (!(error <= 1e-8 * std::max(1.0, std::abs(value)))) {
    throw AnalysisError("flux quadrature did not converge (error estimate " +
                        std::to_string(error) + ")");
  }
  return value;
}

double stationary_density(RateKind kind, double T, double e) {
  require_flux_kind(kind, "stationary_density");
  require_positive(T, "temperature");
  if (!(e > 0.0)) return 0.0;
  if (kind == RateKind::SumSqrt) return std::exp(-e / T) / T;
  return std::exp(-e / T) / std::sqrt(kPi * T * e);
}

double pair_balance_residual(RateKind kind, double T_first, double T_second,
                             double e1, double e2) {
  require_flux_kind(kind, "pair_balance_residual");
  require_positive(T_first, "temperature");
  require_positive(T_second, "temperature");
  require_positive(e1, "energy");
  require_positive(e2, "energy");
  const RateSpec spec(kind);
  const double S = e1 + e2;

  // Pre-image (x, S - x) with x = S sin^2(phi), dx = S sin(2 phi) dphi.
  // The stationary weights are written out with the Jacobian folded in so
  // that the Gamma(1/2) factors x^{-1/2} (S - x)^{-1/2} never blow up.
  auto integrand = [&](double phi) {
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    const double x = S * s * s;
    const double y = S * c * c;
    const double rate = pair_rate(spec, x, y);
    double weight;
    if (kind == RateKind::SumSqrt) {
      weight = std::exp(-x / T_first) / T_first * std::exp(-y / T_second) /
               T_second * 2.0 * S * s * c;
    } else {
      // (x y)^{-1/2} * 2 S s c = 2.
      weight = std::exp(-x / T_first - y / T_second) /
               (kPi * std::sqrt(T_first * T_second)) * 2.0;
    }
    return rate * weight / S;
  };
  double error = 0.0;
  const double inflow = gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, kPi / 2.0, 20, 1e-14, &error);
  if (!(error <= 1e-10 * std::max(1.0, std::abs(inflow)))) {
    throw AnalysisError("balance quadrature did not converge (error " +
                        std::to_string(error) + ")");
  }
  const double outflow = pair_rate(spec, e1, e2) *
                         stationary_density(kind, T_first, e1) *
                         stationary_density(kind, T_second, e2);
  return inflow - outflow;
}

double temperature_from_mean(RateKind kind, double mean) {
  require_flux_kind(kind, "temperature_from_mean");
  return kind == RateKind::SumSqrt ? mean : 2.0 * mean;
}

double mean_from_temperature(RateKind kind, double T) {
  require_flux_kind(kind, "mean_from_temperature");
  return kind == RateKind::SumSqrt ? T : 0.5 * T;
}

}  // namespace heatchain
