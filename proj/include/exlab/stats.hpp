#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace exlab {

/// Point estimate with a symmetric confidence interval.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

/// Welford mean/variance accumulator with an exact pairwise merge.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other);

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double se() const;

  /// Normal-approximation interval at two-sided `level`.
  Estimate estimate(double level = 0.99) const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Two-sided standard-normal critical value, e.g. 2.5758 for level 0.99.
double z_critical(double level);

/// Wilson score interval for k successes out of n.
Estimate wilson(std::size_t k, std::size_t n, double level = 0.99);

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi_square_sf(double statistic, double df);

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

/// Goodness of fit of integer-valued observations against probabilities
/// `probs[k]` for value k (the last entry is the upper tail). Adjacent bins
/// are pooled from the right until every expected count is >= min_expected.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs,
                               double min_expected = 5.0);

/// Two-sample chi-square homogeneity test on histograms over a common
/// support. Sparse upper bins are pooled until each pooled bin has
/// expected count >= min_expected in both rows.
ChiSquareResult chi_square_two_sample(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                      double min_expected = 5.0);

/// Kolmogorov limiting survival function Q(lambda) = P[K > lambda].
double kolmogorov_sf(double lambda);

struct KsResult {
  double distance = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Lag-1 sample autocorrelation.
double lag1_autocorrelation(std::span<const double> xs);

}  // namespace exlab
