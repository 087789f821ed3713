#ifndef LWEAK_BOUNDS_HPP_
#define LWEAK_BOUNDS_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lweak/blocks.hpp"

namespace lweak {

/// Inputs shared by the block-based exponential inequalities.
struct BoundParams {
  double c = 1.0;       // almost-sure bound |X_n| <= c
  double sigma2 = 1.0;  // long-run variance
  std::size_t p = 1;    // block length p_n
  double d = 2.0;       // d_n > 1
  std::size_t n = 2;

  std::size_t r() const { return p == 0 ? 0 : n / (2 * p); }

  /// Largest t allowed by the block Laplace-transform bound,
  /// ((d_n - 1) / d_n) / (c p_n).
  double t_threshold() const { return (d - 1.0) / d / (c * static_cast<double>(p)); }
};

/// A bound value together with the hypotheses it failed, if any.
struct BoundEvaluation {
  double value = 0.0;
  bool valid = true;
  std::vector<std::string> violated_conditions;

  void require(bool ok, std::string condition) {
    if (!ok) {
      valid = false;
      violated_conditions.push_back(std::move(condition));
    }
  }
};

namespace detail {

inline void check_params(BoundEvaluation &e, const BoundParams &p) {
  e.require(p.c > 0.0, "c > 0");
  e.require(p.sigma2 > 0.0, "sigma2 > 0");
  e.require(p.d > 1.0, "d_n > 1");
  e.require(p.p >= 1 && 2 * p.p <= p.n, "1 <= p_n <= n/2");
}

}  // namespace detail

/// log sum_{j=0}^{m-1} exp(j L). Returns -inf for an empty sum. Uses
/// (1 - q^m)/(1 - q) through expm1, with a series fallback when |1 - q| < 1e-8.
inline double log_geometric_sum(double log_ratio, std::size_t terms) {
  if (terms == 0) return -std::numeric_limits<double>::infinity();
  const double m = static_cast<double>(terms);
  const double L = log_ratio;
  if (std::abs(std::expm1(L)) < 1e-8) {
    // sum_j (1 + jL + j^2 L^2 / 2) to second order
    const double s1 = m * (m - 1.0) / 2.0;
    const double s2 = (m - 1.0) * m * (2.0 * m - 1.0) / 6.0;
    return std::log(m + L * s1 + 0.5 * L * L * s2);
  }
  if (L < 0.0) return std::log(std::expm1(m * L) / std::expm1(L));
  // Factor out the largest term for positive ratios.
  return (m - 1.0) * L + std::log(std::expm1(-m * L) / std::expm1(-L));
}

inline double geometric_sum(double log_ratio, std::size_t terms) {
  return std::exp(log_geometric_sum(log_ratio, terms));
}

/// E exp(t Y_{j,n}) <= exp(2 t^2 sigma^2 p_n d_n) for t <= ((d_n-1)/d_n)/(c p_n).
inline BoundEvaluation laplace_block_bound(double t, const BoundParams &params) {
  BoundEvaluation e;
  detail::check_params(e, params);
  e.require(t <= params.t_threshold(), "t <= ((d_n-1)/d_n)/(c p_n)");
  e.value = std::exp(2.0 * t * t * params.sigma2 * static_cast<double>(params.p) * params.d);
  return e;
}

/// Moment generating function bound for the odd-block sum:
///   t^2 e^{tcn/2} p_n v(p_n) sum_{j=0}^{r_n-2} e^{j t p_n (2 t sigma^2 d_n - c)}
///   + e^{t^2 sigma^2 n d_n}.
inline BoundEvaluation odd_sum_mgf_bound(double t, const BoundParams &params, double v_pn) {
  BoundEvaluation e;
  detail::check_params(e, params);
  e.require(t <= params.t_threshold(), "t <= ((d_n-1)/d_n)/(c p_n)");
  e.require(v_pn >= 0.0, "v(p_n) >= 0");
  const double n = static_cast<double>(params.n);
  const double p = static_cast<double>(params.p);
  const double second = std::exp(t * t * params.sigma2 * n * params.d);
  double first = 0.0;
  const std::size_t terms = params.r() >= 2 ? params.r() - 1 : 0;
  if (v_pn > 0.0 && t != 0.0 && terms > 0) {
    const double log_ratio = t * p * (2.0 * t * params.sigma2 * params.d - params.c);
    first = std::exp(2.0 * std::log(std::abs(t)) + t * params.c * n / 2.0 + std::log(p * v_pn) +
                     log_geometric_sum(log_ratio, terms));
  }
  e.value = first + second;
  return e;
}

/// Explicit Markov bound on P(Z_od > x) at t = x / (2 sigma^2 n d_n):
///   t^2 e^{tcn/2} p_n v(p_n) e^{-tx} sum_{j=0}^{r_n-2} e^{j t p_n (2 t sigma^2 d_n - c)}
///   + exp(-x^2 / (4 sigma^2 n d_n)).
inline BoundEvaluation tail_bound(double x, const BoundParams &params, double v_pn) {
  BoundEvaluation e;
  detail::check_params(e, params);
  e.require(x >= 0.0, "x >= 0");
  e.require(v_pn >= 0.0, "v(p_n) >= 0");
  const double n = static_cast<double>(params.n);
  const double p = static_cast<double>(params.p);
  const double t = x / (2.0 * params.sigma2 * n * params.d);
  e.require(t <= params.t_threshold(), "t <= ((d_n-1)/d_n)/(c p_n)");
  const double series_rate = 2.0 * t * params.sigma2 * params.d - params.c;
  e.require(series_rate < 0.0, "2 t sigma^2 d_n - c < 0");

  const double second = std::exp(-x * x / (4.0 * params.sigma2 * n * params.d));
  double first = 0.0;
  const std::size_t terms = params.r() >= 2 ? params.r() - 1 : 0;
  if (v_pn > 0.0 && t > 0.0 && terms > 0) {
    first = std::exp(2.0 * std::log(t) + t * params.c * n / 2.0 + std::log(p * v_pn) - t * x +
                     log_geometric_sum(t * p * series_rate, terms));
  }
  e.value = first + second;
  return e;
}

// ---------------------------------------------------------------------------
// Rate schedules
// ---------------------------------------------------------------------------

/// Exponential-moment condition sup_{|t|<=tau} E e^{t|X|} <= U with tau > 3.
struct LaplaceCondition {
  double tau = 4.0;
  double U = 1.0;

  LaplaceCondition() = default;
  LaplaceCondition(double tau_, double U_) : tau(tau_), U(U_) {
    if (!(tau > 3.0)) throw std::invalid_argument("Laplace condition needs tau > 3");
    if (!(U > 0.0)) throw std::invalid_argument("Laplace condition needs U > 0");
  }
};

/// (p_n, d_n, epsilon_n[, c_n]) for one n, plus the admissibility verdict.
struct RateSchedule {
  double theta = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  double d = 0.0;
  double epsilon = 0.0;
  std::optional<double> truncation_level;  // c_n, unbounded case only
  double level = 0.0;                      // c or c_n used in the threshold
  double d_constant = 0.0;                 // d_n / (n^{2theta-1} log n [c_n^2])
  double lemma_t = 0.0;                    // epsilon_n / (2 sigma^2 d_n)
  double rate_exponent = 0.0;              // 1 - theta
  std::optional<double> markov_t;          // alpha + 2(1 - theta)
  std::optional<double> tail_term;         // 2 n U / (t^2 eps^2) e^{-t c_n}
  BoundEvaluation admissibility;
};

namespace detail {

inline void check_schedule_inputs(std::size_t n, double theta, double alpha, double sigma2) {
  if (!(theta > 0.5 && theta < 1.0))
    throw std::invalid_argument("theta must lie in (1/2, 1), got " + std::to_string(theta));
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1, got " + std::to_string(alpha));
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  if (n < 4) throw std::invalid_argument("schedule needs n >= 4");
}

inline void check_admissibility(RateSchedule &s) {
  auto &a = s.admissibility;
  const double p = static_cast<double>(s.p);
  a.require(s.p >= 1 && 2 * s.p <= s.n, "1 <= p_n <= n/2");
  a.require(s.d > 1.0, "d_n > 1");
  a.require(s.lemma_t <= (s.d - 1.0) / s.d / (s.level * p), "t <= ((d_n-1)/d_n)/(c p_n)");
  a.require(s.lemma_t * s.level * p <= s.d / 2.0, "t c p_n <= d_n/2");
  a.value = s.lemma_t;
}

}  // namespace detail

/// Bounded-variable schedule: p_n = floor(n^theta),
/// d_n = (4 alpha c^2 / sigma^2) n^{2theta-1} log n,
/// epsilon_n = sqrt(4 sigma^2 alpha d_n log n / n). With this constant
/// t c p_n = p_n / (2 n^theta) <= 1/2.
inline RateSchedule slln_schedule(std::size_t n, double theta, double alpha, double sigma2,
                                  double c) {
  detail::check_schedule_inputs(n, theta, alpha, sigma2);
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);
  RateSchedule s;
  s.theta = theta;
  s.alpha = alpha;
  s.n = n;
  s.p = block_length(n, theta);
  s.level = c;
  s.d_constant = 4.0 * alpha * c * c / sigma2;
  s.d = s.d_constant * std::pow(nd, 2.0 * theta - 1.0) * log_n;
  s.epsilon = std::sqrt(4.0 * sigma2 * alpha * s.d * log_n / nd);
  s.lemma_t = s.epsilon / (2.0 * sigma2 * s.d);
  s.rate_exponent = 1.0 - theta;
  detail::check_admissibility(s);
  return s;
}

/// Truncated schedule for unbounded variables under a Laplace condition:
/// c_n = log n, d_n = (alpha/sigma^2) n^{2theta-1} c_n^2 log n,
/// epsilon_n^2 = 4 alpha^2 n^{2theta-2} c_n^2 log n, Markov exponent
/// t = alpha + 2(1-theta), tail term 2nU/(t^2 epsilon_n^2) e^{-t c_n}.
inline RateSchedule unbounded_schedule(std::size_t n, double theta, double alpha, double sigma2,
                                       const LaplaceCondition &cond) {
  detail::check_schedule_inputs(n, theta, alpha, sigma2);
  const double markov_t = alpha + 2.0 * (1.0 - theta);
  if (!(cond.tau > markov_t))
    throw std::invalid_argument("Laplace condition needs tau > alpha + 2(1-theta) = " +
                                std::to_string(markov_t));
  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);
  RateSchedule s;
  s.theta = theta;
  s.alpha = alpha;
  s.n = n;
  s.p = block_length(n, theta);
  s.truncation_level = log_n;
  s.level = log_n;
  s.d_constant = alpha / sigma2;
  s.d = s.d_constant * std::pow(nd, 2.0 * theta - 1.0) * log_n * log_n * log_n;
  const double eps2 = 4.0 * alpha * alpha * std::pow(nd, 2.0 * theta - 2.0) * log_n * log_n * log_n;
  s.epsilon = std::sqrt(eps2);
  s.lemma_t = s.epsilon / (2.0 * sigma2 * s.d);
  s.rate_exponent = 1.0 - theta;
  s.markov_t = markov_t;
  s.tail_term = 2.0 * nd * cond.U / (markov_t * markov_t * eps2) * std::exp(-markov_t * log_n);
  detail::check_admissibility(s);
  s.admissibility.require(markov_t < cond.tau, "t < tau");
  return s;
}

/// Smallest n of an increasing schedule grid from which every schedule is
/// admissible; nullopt when the last one is not.
inline std::optional<std::size_t> admissible_from(const std::vector<RateSchedule> &schedules) {
  std::optional<std::size_t> n0;
  for (auto it = schedules.rbegin(); it != schedules.rend() && it->admissibility.valid; ++it)
    n0 = it->n;
  return n0;
}

/// E X_{2,1,n}^2 <= (2U / t^2) e^{-t c_n} for 0 < t < tau.
inline double truncated_second_moment_bound(double t, double c_n, double U, double tau) {
  if (!(t > 0.0 && t < tau))
    throw std::invalid_argument("truncated_second_moment_bound needs 0 < t < tau");
  return 2.0 * U / (t * t) * std::exp(-t * c_n);
}

}  // namespace lweak

#endif  // LWEAK_BOUNDS_HPP_
