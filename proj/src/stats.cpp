#include "greenscan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace greenscan::stats {

void PairedSeries::validate(std::size_t min_size) const {
  if (measured.size() != reference.size())
    throw ValidationError("paired series have different lengths");
  if (measured.size() < min_size)
    throw InsufficientDataError("need at least " + std::to_string(min_size) +
                                " pairs, got " + std::to_string(measured.size()));
  for (std::size_t i = 0; i < measured.size(); ++i)
    if (!std::isfinite(measured[i]) || !std::isfinite(reference[i]))
      throw ValidationError("paired series contains undefined entries");
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny)
    d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps)
      break;
  }
  return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0))
    throw ValidationError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0))
    throw ValidationError("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0)
    return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0))
    throw ValidationError("t distribution needs df > 0");
  if (std::isinf(t))
    return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ValidationError("paired series have different lengths");
  const std::size_t n = x.size();
  if (n < 3)
    throw InsufficientDataError("Pearson correlation needs n >= 3");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelationError("correlation of a constant series");

  PearsonResult res;
  res.n = n;
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  res.p = pearson_p_value(res.r, n);
  return res;
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3)
    throw InsufficientDataError("p-value needs n >= 3");
  if (!(r >= -1.0 && r <= 1.0))
    throw ValidationError("correlation outside [-1, 1]");
  const double df = static_cast<double>(n) - 2.0;
  // df / (df + t^2) reduces to 1 - r^2.
  const double one_minus_r2 = 1.0 - r * r;
  return one_minus_r2 <= 0.0 ? 0.0 : incomplete_beta(df / 2.0, 0.5, one_minus_r2);
}

PearsonResult pearson(const PairedSeries &series) {
  series.validate(3);
  return pearson(series.measured, series.reference);
}

BlandAltmanResult bland_altman(const PairedSeries &series) {
  series.validate(2);
  const std::size_t n = series.size();
  BlandAltmanResult res;
  for (std::size_t i = 0; i < n; ++i) {
    res.diffs.push_back(series.measured[i] - series.reference[i]);
    res.means.push_back((series.measured[i] + series.reference[i]) / 2.0);
  }
  res.mean_diff = std::accumulate(res.diffs.begin(), res.diffs.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : res.diffs)
    ss += (d - res.mean_diff) * (d - res.mean_diff);
  res.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
  res.upper_loa = res.mean_diff + kAgreementZ * res.sd_diff;
  res.lower_loa = res.mean_diff - kAgreementZ * res.sd_diff;
  for (double d : res.diffs)
    res.outside_count += (d > res.upper_loa || d < res.lower_loa);
  return res;
}

CorrelationMatrix correlation_matrix(const std::vector<NamedColumn> &columns) {
  const std::size_t k = columns.size();
  CorrelationMatrix m;
  if (k == 0)
    return m;
  const std::size_t n = columns.front().values.size();
  for (const auto &c : columns) {
    if (c.values.size() != n)
      throw ValidationError("correlation matrix columns differ in length");
    m.names.push_back(c.name);
  }
  if (n < 3)
    throw InsufficientDataError("correlation matrix needs columns of length >= 3");

  std::vector<bool> constant(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto [lo, hi] =
        std::minmax_element(columns[i].values.begin(), columns[i].values.end());
    constant[i] = *lo == *hi;
  }
  m.r.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    if (constant[i])
      continue;
    m.r[i][i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (constant[j])
        continue;
      const double r = pearson(columns[i].values, columns[j].values).r;
      m.r[i][j] = r;
      m.r[j][i] = r;
    }
  }
  return m;
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty())
    return s;
  std::sort(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<GroupSummary> aggregate_by(const std::vector<AggregateRow> &rows,
                                       GroupKey key) {
  std::map<std::pair<std::string, std::string>,
           std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const auto &row : rows) {
    std::pair<std::string, std::string> k;
    if (key != GroupKey::condition)
      k.first = row.species;
    if (key != GroupKey::species)
      k.second = row.condition;
    auto &g = groups[k];
    g.first.push_back(row.ndvi);
    g.second.push_back(row.ctd);
  }
  std::vector<GroupSummary> out;
  for (auto &[k, values] : groups) {
    if (values.first.empty())
      continue;
    out.push_back({k.first, k.second, summarize(std::move(values.first)),
                   summarize(std::move(values.second))});
  }
  return out;
}

OrdinalMap default_condition_ordinal() {
  return {{"poor", 0.0}, {"fair", 1.0}, {"good", 2.0}};
}

} // namespace greenscan::stats
