#include "exlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "exlab/error.hpp"

namespace exlab {

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  n_ += other.n_;
}

double RunningStats::se() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

Estimate RunningStats::estimate(double level) const {
  const double half = z_critical(level) * se();
  return {mean_, se(), mean_ - half, mean_ + half, n_};
}

double z_critical(double level) {
  require(level > 0.0 && level < 1.0, "confidence level must lie in (0,1)");
  const boost::math::normal standard;
  return boost::math::quantile(boost::math::complement(standard, (1.0 - level) / 2.0));
}

Estimate wilson(std::size_t k, std::size_t n, double level) {
  if (n == 0) return {0.0, 0.0, 0.0, 1.0, 0};
  const double z = z_critical(level);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {p, std::sqrt(p * (1.0 - p) / nn), std::max(0.0, centre - half), std::min(1.0, centre + half), n};
}

double chi_square_sf(double statistic, double df) {
  if (df <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs,
                               double min_expected) {
  require(observed.size() == probs.size() && !observed.empty(), "chi_square_gof: size mismatch");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  std::vector<double> obs(observed.begin(), observed.end());
  std::vector<double> exp(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) exp[k] = probs[k] * total;

  // Drop leading bins that carry no probability and no observations.
  std::size_t first = 0;
  while (first + 1 < exp.size() && exp[first] == 0.0 && obs[first] == 0.0) ++first;
  std::vector<double> o(obs.begin() + static_cast<std::ptrdiff_t>(first), obs.end());
  std::vector<double> e(exp.begin() + static_cast<std::ptrdiff_t>(first), exp.end());
  while (e.size() > 1 && e.back() < min_expected) {
    const double eb = e.back();
    const double ob = o.back();
    e.pop_back();
    o.pop_back();
    e.back() += eb;
    o.back() += ob;
  }
  ChiSquareResult r;
  r.bins = e.size();
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k] > 0.0) {
      const double d = o[k] - e[k];
      r.statistic += d * d / e[k];
    } else if (o[k] > 0.0) {
      r.statistic = std::numeric_limits<double>::infinity();
    }
  }
  r.df = static_cast<int>(e.size()) - 1;
  r.p_value = std::isinf(r.statistic) ? 0.0 : chi_square_sf(r.statistic, r.df);
  return r;
}

ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                      double min_expected) {
  const std::size_t k = std::max(a.size(), b.size());
  std::vector<double> ra(k, 0.0), rb(k, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) ra[i] = static_cast<double>(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) rb[i] = static_cast<double>(b[i]);
  const double na = std::accumulate(ra.begin(), ra.end(), 0.0);
  const double nb = std::accumulate(rb.begin(), rb.end(), 0.0);
  ChiSquareResult r;
  if (na == 0.0 || nb == 0.0) return r;
  const double n = na + nb;

  // Greedy left-to-right pooling: close a bin once both expected counts
  // reach min_expected; merge any remainder into the last closed bin.
  std::vector<std::pair<double, double>> pooled;
  double ca = 0.0, cb = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    ca += ra[i];
    cb += rb[i];
    const double col = ca + cb;
    if (col * std::min(na, nb) / n >= min_expected) {
      pooled.emplace_back(ca, cb);
      ca = cb = 0.0;
    }
  }
  if (ca + cb > 0.0) {
    if (pooled.empty()) {
      pooled.emplace_back(ca, cb);
    } else {
      pooled.back().first += ca;
      pooled.back().second += cb;
    }
  }
  r.bins = pooled.size();
  if (pooled.size() < 2) return r;
  for (const auto& [oa, ob] : pooled) {
    const double col = oa + ob;
    const double ea = col * na / n;
    const double eb = col * nb / n;
    r.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  r.df = static_cast<int>(pooled.size()) - 1;
  r.p_value = chi_square_sf(r.statistic, r.df);
  return r;
}

double kolmogorov_sf(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)};
}

double lag1_autocorrelation(std::span<const double> xs) {
  if (xs.size() < 3) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - mean;
    den += d * d;
    if (i + 1 < xs.size()) num += d * (xs[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace exlab
