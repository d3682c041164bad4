#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "heatchain/errors.hpp"
#include "heatchain/stats.hpp"

namespace heatchain {

void GammaSufficientStats::add(double x) {
  ++count;
  sum += x;
  sum_log += std::log(x);
  sum_sq += x * x;
}

void GammaSufficientStats::merge(const GammaSufficientStats& other) {
  count += other.count;
  sum += other.sum;
  sum_log += other.sum_log;
  sum_sq += other.sum_sq;
}

double GammaSufficientStats::variance() const {
  const double n = static_cast<double>(count);
  const double m = sum / n;
  return std::max(0.0, sum_sq / n - m * m);
}

double gamma_log_likelihood(const GammaSufficientStats& stats, double shape,
                            double scale) {
  const double n = static_cast<double>(stats.count);
  return n * ((shape - 1.0) * stats.mean_log() - stats.mean() / scale -
              shape * std::log(scale) - std::lgamma(shape));
}

double gamma_cdf(const GammaFit& fit, double x) {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(fit.shape, x / fit.scale);
}

GammaFit gamma_mle(const GammaSufficientStats& stats) {
  if (stats.count < 100) {
    throw AnalysisError("gamma_mle: need at least 100 samples");
  }
  const double mean = stats.mean();
  const double var = stats.variance();
  // s >= 0 by Jensen; s == 0 iff all samples are equal.
  const double s = std::log(mean) - stats.mean_log();
  if (!(var > 0.0) || !(s > 1e-14)) {
    throw AnalysisError("gamma_mle: samples have zero variance");
  }

  // g(a) = ln a - digamma(a) - s is strictly decreasing from +inf to -s.
  auto g = [s](double a) { return std::log(a) - boost::math::digamma(a) - s; };
  auto dg = [](double a) { return 1.0 / a - boost::math::trigamma(a); };

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double a = mean * mean / var;
  int it = 0;
  for (; it < 200; ++it) {
    const double ga = g(a);
    if (ga > 0.0) {
      lo = a;
    } else {
      hi = a;
    }
    double next = a - ga / dg(a);
    if (!(next > lo && next < hi)) {
      next = std::isinf(hi) ? 2.0 * a : 0.5 * (lo + hi);
    }
    const double step = std::abs(next - a);
    a = next;
    if (step <= 1e-8 * a) break;
  }
  if (it == 200) throw AnalysisError("gamma_mle: Newton iteration stalled");
  return {a, mean / a, it + 1};
}

GammaFit gamma_mle(std::span<const double> samples) {
  GammaSufficientStats stats;
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DomainError("gamma_mle: samples must be positive and finite");
    }
    stats.add(x);
  }
  return gamma_mle(stats);
}

}  // namespace heatchain
