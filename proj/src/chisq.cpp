#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "heatchain/errors.hpp"
#include "heatchain/stats.hpp"

namespace heatchain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BinEdges uniform_edges(double width, int finite_bins) {
  BinEdges edges;
  for (int i = 0; i <= finite_bins; ++i) edges.push_back(i * width);
  edges.push_back(kInf);
  return edges;
}

// Merges bins of `expected` (and the matching `observed`) left to right
// until each holds at least kMinExpectedCount; a sparse tail is folded
// into the last kept bin.
std::size_t merge_sparse(std::vector<std::uint64_t>& observed,
                         std::vector<double>& expected) {
  std::vector<std::uint64_t> obs_out;
  std::vector<double> exp_out;
  std::uint64_t obs_acc = 0;
  double exp_acc = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    obs_acc += observed[i];
    exp_acc += expected[i];
    if (exp_acc >= kMinExpectedCount) {
      obs_out.push_back(obs_acc);
      exp_out.push_back(exp_acc);
      obs_acc = 0;
      exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0 || obs_acc > 0) {
    if (exp_out.empty()) {
      obs_out.push_back(obs_acc);
      exp_out.push_back(exp_acc);
    } else {
      obs_out.back() += obs_acc;
      exp_out.back() += exp_acc;
    }
  }
  const std::size_t merged = expected.size() - exp_out.size();
  observed = std::move(obs_out);
  expected = std::move(exp_out);
  return merged;
}

void fill_thresholds(ChiSquareReport& report, int estimated_parameters,
                     double level) {
  report.threshold = chi2_quantile(report.dof, level);
  report.pass = report.statistic < report.threshold;
  report.reduced_dof = report.dof - estimated_parameters;
  report.reduced_threshold =
      report.reduced_dof >= 1 ? chi2_quantile(report.reduced_dof, level) : 0.0;
}

// Groups consecutive indices so that no group has a zero marginal.
std::vector<std::size_t> nonempty_groups(
    const std::vector<std::uint64_t>& marginal) {
  std::vector<std::size_t> group(marginal.size(), 0);
  std::size_t current = 0;
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < marginal.size(); ++i) {
    group[i] = current;
    acc += marginal[i];
    if (acc > 0 && i + 1 < marginal.size()) {
      ++current;
      acc = 0;
    }
  }
  // A trailing empty group joins its predecessor.
  if (acc == 0 && current > 0) {
    for (auto& g : group) {
      if (g == current) g = current - 1;
    }
  }
  return group;
}

}  // namespace

BinEdges marginal_gof_edges() { return uniform_edges(0.2, 30); }

BinEdges independence_edges() { return uniform_edges(0.1, 16); }

void validate_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw DomainError("need at least one bin");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw DomainError("bin edges must be strictly increasing");
    }
  }
  if (!std::isinf(edges.back())) {
    throw DomainError("last bin edge must be +inf");
  }
}

std::size_t bin_index(std::span<const double> edges, double x) {
  const auto it = std::upper_bound(edges.begin(), edges.end() - 1, x);
  if (it == edges.begin()) return 0;
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::vector<std::uint64_t> histogram(std::span<const double> samples,
                                     std::span<const double> edges) {
  validate_edges(edges);
  std::vector<std::uint64_t> counts(edges.size() - 1, 0);
  for (double x : samples) ++counts[bin_index(edges, x)];
  return counts;
}

double chi2_cdf(int dof, double x) {
  if (dof < 1) throw DomainError("chi2_cdf: dof must be >= 1");
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double q) {
  if (dof < 1) throw DomainError("chi2_quantile: dof must be >= 1");
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("chi2_quantile: q must lie in (0, 1)");
  }
  double lo = 0.0;
  double hi = dof + 10.0;
  while (chi2_cdf(dof, hi) < q) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (chi2_cdf(dof, mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ChiSquareReport chisq_gof_counts(std::span<const std::uint64_t> counts,
                                 std::span<const double> edges,
                                 const std::function<double(double)>& cdf,
                                 int estimated_parameters, double level) {
  validate_edges(edges);
  if (counts.size() + 1 != edges.size()) {
    throw DomainError("chisq_gof: one count per bin");
  }
  const std::uint64_t n =
      std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (n == 0) throw AnalysisError("chisq_gof: no samples");

  ChiSquareReport report;
  report.observed.assign(counts.begin(), counts.end());
  report.expected.resize(counts.size());
  double lower = cdf(edges.front());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double upper = cdf(edges[i + 1]);
    report.expected[i] = static_cast<double>(n) * (upper - lower);
    lower = upper;
  }
  report.merged_bins = merge_sparse(report.observed, report.expected);
  if (report.expected.size() < 2) {
    throw AnalysisError("chisq_gof: fewer than two bins after merging");
  }
  for (std::size_t i = 0; i < report.expected.size(); ++i) {
    const double d = static_cast<double>(report.observed[i]) -
                     report.expected[i];
    report.statistic += d * d / report.expected[i];
  }
  report.dof = static_cast<int>(report.expected.size()) - 1;
  fill_thresholds(report, estimated_parameters, level);
  return report;
}

ChiSquareReport chisq_gof(std::span<const double> samples, const GammaFit& fit,
                          std::span<const double> edges, double level) {
  const auto counts = histogram(samples, edges);
  return chisq_gof_counts(
      counts, edges, [&fit](double x) { return gamma_cdf(fit, x); }, 2, level);
}

ContingencyTable::ContingencyTable(BinEdges row_edges, BinEdges column_edges)
    : row_edges_(std::move(row_edges)),
      column_edges_(std::move(column_edges)),
      rows_(row_edges_.size() - 1),
      columns_(column_edges_.size() - 1),
      counts_(rows_ * columns_, 0) {
  validate_edges(row_edges_);
  validate_edges(column_edges_);
}

void ContingencyTable::add(double x, double y) {
  ++counts_[bin_index(row_edges_, x) * columns_ + bin_index(column_edges_, y)];
  ++total_;
}

void ContingencyTable::merge(const ContingencyTable& other) {
  if (other.rows_ != rows_ || other.columns_ != columns_) {
    throw DomainError("contingency tables differ in shape");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    counts_[i] += other.counts_[i];
  }
  total_ += other.total_;
}

void ContingencyTable::set_total_from_counts() {
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ChiSquareReport independence_chisq(const ContingencyTable& table,
                                   double level) {
  const std::uint64_t n = table.total();
  if (n == 0) throw AnalysisError("independence_chisq: empty table");

  std::vector<std::uint64_t> row_sum(table.rows(), 0);
  std::vector<std::uint64_t> col_sum(table.columns(), 0);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns(); ++c) {
      row_sum[r] += table.at(r, c);
      col_sum[c] += table.at(r, c);
    }
  }
  const auto row_group = nonempty_groups(row_sum);
  const auto col_group = nonempty_groups(col_sum);
  const std::size_t R = row_group.back() + 1;
  const std::size_t C = col_group.back() + 1;
  if (R < 2 || C < 2) {
    throw AnalysisError(
        "independence_chisq: a margin has fewer than two non-empty bins");
  }

  std::vector<std::uint64_t> merged(R * C, 0);
  std::vector<std::uint64_t> O_row(R, 0);
  std::vector<std::uint64_t> O_col(C, 0);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns(); ++c) {
      const auto v = table.at(r, c);
      merged[row_group[r] * C + col_group[c]] += v;
      O_row[row_group[r]] += v;
      O_col[col_group[c]] += v;
    }
  }

  ChiSquareReport report;
  report.merged_bins = (table.rows() - R) + (table.columns() - C);
  const double N = static_cast<double>(n);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      const double e = static_cast<double>(O_row[r]) *
                       static_cast<double>(O_col[c]) / N;
      const double d = static_cast<double>(merged[r * C + c]) - e;
      report.statistic += d * d / e;
      report.observed.push_back(merged[r * C + c]);
      report.expected.push_back(e);
    }
  }
  report.dof = static_cast<int>((R - 1) * (C - 1));
  fill_thresholds(report, 0, level);
  return report;
}

ChiSquareReport independence_chisq(std::span<const double> first,
                                   std::span<const double> second,
                                   std::span<const double> edges,
                                   double level) {
  if (first.size() != second.size()) {
    throw DomainError("independence_chisq: paired samples differ in length");
  }
  ContingencyTable table(BinEdges(edges.begin(), edges.end()),
                         BinEdges(edges.begin(), edges.end()));
  for (std::size_t i = 0; i < first.size(); ++i) table.add(first[i], second[i]);
  return independence_chisq(table, level);
}

Extrapolation extrapolate_chisq(
    std::span<const std::pair<double, double>> points, int dof) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [n, chi2] : points) {
    if (!(n > 0.0) || !(chi2 >= 0.0)) {
      throw DomainError("extrapolate_chisq: need N > 0 and chi2 >= 0");
    }
    xs.push_back(1.0 / n);
    ys.push_back(std::sqrt(chi2));
  }
  auto distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  if (distinct.size() < 3) {
    throw AnalysisError("extrapolate_chisq: need at least three distinct N");
  }

  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  Extrapolation out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - out.intercept - out.slope * xs[i];
    ssr += r * r;
  }
  const double resid_var = ssr / (n - 2.0);
  out.intercept_se = std::sqrt(resid_var * (1.0 / n + mx * mx / sxx));
  const boost::math::students_t t_dist(n - 2.0);
  const double t = boost::math::quantile(t_dist, 0.975);
  out.ci_low = out.intercept - t * out.intercept_se;
  out.ci_high = out.intercept + t * out.intercept_se;
  out.sqrt_threshold = std::sqrt(chi2_quantile(dof, 0.95));
  out.pass = out.intercept < out.sqrt_threshold;
  return out;
}

}  // namespace heatchain
