#include <cmath>
#include <optional>
#include <sstream>

#include "heatchain/errors.hpp"
#include "heatchain/stats.hpp"

namespace heatchain {

namespace {

constexpr double kStepTolerance = 1e-10;
constexpr double kAnchorTolerance = 1e-8;

// Root T_next of J(T, T_next) = target, or nullopt if the root lies below
// `floor` (no positive temperature is cold enough) or above `ceiling`.
// J is strictly increasing in its second argument.
std::optional<double> step_root(RateKind kind, double T, double target,
                                double floor, double ceiling) {
  double lo = T;
  double hi = T;
  if (target >= 0.0) {
    hi = 2.0 * T;
    while (theoretical_flux(kind, T, hi) < target) {
      lo = hi;
      hi *= 2.0;
      if (hi > ceiling) return std::nullopt;
    }
  } else {
    lo = 0.5 * T;
    while (theoretical_flux(kind, T, lo) > target) {
      hi = lo;
      lo *= 0.5;
      if (lo < floor) return std::nullopt;
    }
  }
  while (hi - lo > kStepTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (theoretical_flux(kind, T, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct Shot {
  std::vector<double> temperatures;
  // -1: fell below any positive temperature, +1: blew past the ceiling,
  // 0: reached the right end.
  int escape = 0;
};

Shot shoot(RateKind kind, double T_left, double flux, std::size_t bonds,
           double floor, double ceiling) {
  Shot shot;
  shot.temperatures.push_back(T_left);
  for (std::size_t i = 0; i < bonds; ++i) {
    const auto next =
        step_root(kind, shot.temperatures.back(), flux, floor, ceiling);
    if (!next) {
      shot.escape = flux >= 0.0 ? 1 : -1;
      return shot;
    }
    shot.temperatures.push_back(*next);
  }
  return shot;
}

}  // namespace

TemperatureProfile predicted_profile(RateKind kind, double left_mean,
                                     double right_mean, std::size_t interior) {
  if (kind == RateKind::CappedMinSqrt) {
    throw DomainError("predicted_profile: no closed-form flux for capped rate");
  }
  if (!(left_mean > 0.0) || !(right_mean > 0.0)) {
    throw DomainError("predicted_profile: anchors must be positive");
  }
  const double T_left = temperature_from_mean(kind, left_mean);
  const double T_right = temperature_from_mean(kind, right_mean);
  const std::size_t bonds = interior + 1;

  TemperatureProfile profile{kind, {}, {}, 0.0};
  if (T_left == T_right) {
    profile.temperatures.assign(interior + 2, T_left);
  } else {
    const double floor = 1e-12 * std::min(T_left, T_right);
    const double ceiling = 1e6 * std::max(T_left, T_right);
    // J* = 0 gives a flat profile; J* = J(T_left, T_right) reaches T_right
    // after one bond and overshoots afterwards. The root lies between.
    double lo = 0.0;
    double hi = theoretical_flux(kind, T_left, T_right);
    if (hi < lo) std::swap(lo, hi);
    const bool rising = T_right > T_left;

    // Signed miss of the right anchor, monotone increasing in the flux.
    auto miss = [&](double flux, Shot& shot) {
      shot = shoot(kind, T_left, flux, bonds, floor, ceiling);
      if (shot.escape != 0) return static_cast<double>(shot.escape);
      return (shot.temperatures.back() - T_right) / T_right;
    };

    Shot shot;
    double flux = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
      flux = 0.5 * (lo + hi);
      const double m = miss(flux, shot);
      if (shot.escape == 0 && std::abs(m) <= kAnchorTolerance) break;
      if (m < 0.0) {
        lo = flux;
      } else {
        hi = flux;
      }
      if (hi - lo <= 1e-300 || (flux == lo && flux == hi)) break;
    }
    if (shot.escape != 0 ||
        std::abs(shot.temperatures.back() - T_right) >
            kAnchorTolerance * T_right * 10.0) {
      std::ostringstream msg;
      msg << "predicted_profile: flux bracket did not close (anchors "
          << T_left << ", " << T_right << ", " << interior
          << " interior sites, last flux " << flux
          << (rising ? ", rising" : ", falling") << ")";
      throw AnalysisError(msg.str());
    }
    shot.temperatures.back() = T_right;
    profile.temperatures = std::move(shot.temperatures);
    profile.flux = flux;
  }
  for (double T : profile.temperatures) {
    profile.mean_energies.push_back(mean_from_temperature(kind, T));
  }
  return profile;
}

}  // namespace heatchain
