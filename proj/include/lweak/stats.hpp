#ifndef LWEAK_STATS_HPP_
#define LWEAK_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

namespace lweak::stats {

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on how the values were produced.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty sample");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> values) {
  if (values.size() < 2)
    throw std::invalid_argument("variance needs at least two values");
  const double m = mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - m;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

/// Standard error of the mean.
inline double standard_error(std::span<const double> values) {
  return std::sqrt(variance(values) / static_cast<double>(values.size()));
}

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Sample covariance with a delete-one jackknife standard error. The
/// leave-one-out covariances are computed in closed form from the sums.
inline Estimate covariance_jackknife(std::span<const double> x,
                                     std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("covariance: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("covariance: need at least 3 pairs");
  const double mx = mean(x);
  const double my = mean(y);
  // Centre first so the running sums stay well conditioned.
  std::vector<double> cx(n), cy(n), cxy(n);
  for (std::size_t i = 0; i < n; ++i) {
    cx[i] = x[i] - mx;
    cy[i] = y[i] - my;
    cxy[i] = cx[i] * cy[i];
  }
  const double sx = pairwise_sum(cx);
  const double sy = pairwise_sum(cy);
  const double sxy = pairwise_sum(cxy);
  const double nd = static_cast<double>(n);
  const double full = (sxy - sx * sy / nd) / (nd - 1.0);

  std::vector<double> loo(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = sx - cx[i];
    const double b = sy - cy[i];
    loo[i] = (sxy - cxy[i] - a * b / (nd - 1.0)) / (nd - 2.0);
  }
  const double loo_mean = mean(loo);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = loo[i] - loo_mean;
    dev[i] = d * d;
  }
  const double var = (nd - 1.0) / nd * pairwise_sum(dev);
  return {full, std::sqrt(var)};
}

/// Sample quantile, linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F| against a
/// continuous distribution function.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)> &cdf) {
  if (sample.empty()) throw std::invalid_argument("KS of empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

/// Asymptotic two-sided 5% critical value of the one-sample KS statistic.
inline double ks_critical_05(std::size_t sample_size) {
  return 1.358 / std::sqrt(static_cast<double>(sample_size));
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_standard_error = 0.0;
};

/// Ordinary least squares of y on x.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need at least two matched points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: constant abscissa");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_standard_error =
        std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
  }
  return fit;
}

/// Exact Clopper-Pearson lower confidence limit for a binomial proportion at
/// two-sided level `1 - alpha`.
inline double clopper_pearson_lower(std::size_t successes, std::size_t trials,
                                    double alpha) {
  if (successes == 0) return 0.0;
  return boost::math::binomial_distribution<double>::find_lower_bound_on_p(
      static_cast<double>(trials), static_cast<double>(successes), alpha / 2.0);
}

/// Two-sided tail mass outside +-k standard deviations of a normal law.
inline double normal_two_sided_alpha(double k) {
  return std::erfc(k / std::numbers::sqrt2);
}

}  // namespace lweak::stats

#endif  // LWEAK_STATS_HPP_
