#ifndef LWEAK_COEFFICIENTS_HPP_
#define LWEAK_COEFFICIENTS_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lweak/models.hpp"
#include "lweak/parallel.hpp"
#include "lweak/rng.hpp"
#include "lweak/stats.hpp"

namespace lweak {

/// Thrown when a long-run variance is zero, negative or not finite.
class DegenerateVariance : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// gamma_1..gamma_K, zero beyond K.
struct FiniteGamma {
  std::vector<double> values;
};

/// gamma_k = A rho^k.
struct GeometricGamma {
  double amplitude = 0.0;
  double rho = 0.5;
};

/// Dependence coefficients gamma_k, k >= 1, of an L-weakly dependent sequence.
class GammaSequence {
 public:
  using Variant = std::variant<FiniteGamma, GeometricGamma>;

  GammaSequence() : GammaSequence(FiniteGamma{}) {}

  GammaSequence(Variant v, std::string note = {}) : v_(std::move(v)), note_(std::move(note)) {
    std::visit(overloaded{
                   [](const FiniteGamma &f) {
                     for (double g : f.values)
                       if (!(std::isfinite(g) && g >= 0.0))
                         throw std::invalid_argument(
                             "gamma coefficients must be finite and nonnegative");
                   },
                   [](const GeometricGamma &g) {
                     if (!(std::isfinite(g.amplitude) && g.amplitude >= 0.0))
                       throw std::invalid_argument("geometric gamma needs A >= 0");
                     if (!(g.rho > 0.0 && g.rho < 1.0))
                       throw std::invalid_argument("geometric gamma needs rho in (0, 1)");
                   },
               },
               v_);
  }

  static GammaSequence finite(std::vector<double> values, std::string note = {}) {
    return GammaSequence(FiniteGamma{std::move(values)}, std::move(note));
  }
  static GammaSequence geometric(double amplitude, double rho, std::string note = {}) {
    return GammaSequence(GeometricGamma{amplitude, rho}, std::move(note));
  }

  const Variant &variant() const { return v_; }
  const std::string &note() const { return note_; }

  /// gamma_k for k >= 1; gamma_0 is not part of the sequence and returns 0.
  double operator[](std::size_t k) const {
    if (k == 0) return 0.0;
    return std::visit(overloaded{
                          [&](const FiniteGamma &f) {
                            return k <= f.values.size() ? f.values[k - 1] : 0.0;
                          },
                          [&](const GeometricGamma &g) {
                            return g.amplitude * std::pow(g.rho, static_cast<double>(k));
                          },
                      },
                      v_);
  }

  /// Largest k with a possibly nonzero gamma_k; nullopt when unbounded.
  std::optional<std::size_t> support_length() const {
    if (const auto *f = std::get_if<FiniteGamma>(&v_)) return f->values.size();
    return std::nullopt;
  }

 private:
  Variant v_;
  std::string note_;
};

/// Absolute-coefficient convolution envelope gamma_k = sigma_xi^2 *
/// sum_j |alpha_j alpha_{j+k}|, k = 1..p-1. Covariances of Lipschitz
/// functions only see the innovations two blocks share, and each shared
/// innovation contributes at most |alpha_j alpha_{j+k}| sigma_xi^2.
inline GammaSequence gamma_sequence(const ModelSpec &model) {
  if (!model.is_stationary())
    throw std::invalid_argument(
        "gamma_sequence: cumulative-sum models have no stationary coefficient sequence");
  if (std::holds_alternative<IID>(model.variant()))
    return GammaSequence::finite({}, "iid");
  const auto w = model.ma_weights();
  const double var = model.law().variance();
  std::vector<double> g;
  for (std::size_t k = 1; k < w.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j + k < w.size(); ++j) s += std::abs(w[j] * w[j + k]);
    g.push_back(var * s);
  }
  return GammaSequence::finite(std::move(g), "moving_average abs-convolution envelope");
}

/// Generalised Cox-Grimmett coefficient v(n) = sum_{k>=n} gamma_k.
inline double cox_grimmett(const GammaSequence &gamma, std::size_t n) {
  if (n == 0) throw std::invalid_argument("cox_grimmett needs n >= 1");
  return std::visit(overloaded{
                        [&](const FiniteGamma &f) {
                          double s = 0.0;
                          for (std::size_t k = n; k <= f.values.size(); ++k)
                            s += f.values[k - 1];
                          return s;
                        },
                        [&](const GeometricGamma &g) {
                          return g.amplitude * std::pow(g.rho, static_cast<double>(n)) /
                                 (1.0 - g.rho);
                        },
                    },
                    gamma.variant());
}

/// D = sum_{l>=1} gamma_l.
inline double total_dependence(const GammaSequence &gamma) { return cox_grimmett(gamma, 1); }

/// Right side of the Newman-type inequality, 4 t^2 sum_{j=1}^{n-1} (n-j) gamma_j.
inline double newman_discrepancy_bound(const GammaSequence &gamma, std::size_t n, double t) {
  if (n < 2) throw std::invalid_argument("newman_discrepancy_bound needs n >= 2");
  double s = 0.0;
  for (std::size_t j = 1; j < n; ++j) s += static_cast<double>(n - j) * gamma[j];
  return 4.0 * t * t * s;
}

// ---------------------------------------------------------------------------
// Long-run variance
// ---------------------------------------------------------------------------

struct AnalyticVariance {};
struct MonteCarloVariance {
  std::size_t replicates = 0;
  std::size_t n = 0;
  double standard_error = 0.0;
};

struct VarianceEstimate {
  double sigma2 = 0.0;
  std::variant<AnalyticVariance, MonteCarloVariance> method;
};

struct MonteCarloVarianceConfig {
  std::size_t n = 1u << 12;
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
};

/// sigma^2 = lim E S_n^2 / n in closed form: sigma_xi^2 (sum alpha)^2.
inline VarianceEstimate long_run_variance(const ModelSpec &model) {
  require_stationary(model, "long_run_variance");
  double s = 0.0;
  for (double a : model.ma_weights()) s += a;
  const double sigma2 = model.law().variance() * s * s;
  if (!(std::isfinite(sigma2) && sigma2 > 0.0))
    throw DegenerateVariance("long-run variance is " + std::to_string(sigma2) +
                             "; sigma^2 must lie in (0, inf)");
  return {sigma2, AnalyticVariance{}};
}

/// Monte Carlo mean of S_n^2 / n over independent replicates.
inline VarianceEstimate long_run_variance_mc(const ModelSpec &model,
                                             const MonteCarloVarianceConfig &cfg) {
  require_stationary(model, "long_run_variance_mc");
  if (cfg.replicates < 2 || cfg.n < 1)
    throw std::invalid_argument("long_run_variance_mc needs replicates >= 2 and n >= 1");
  std::vector<double> ratio(cfg.replicates);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto path = sample_path(model, cfg.n, derive_seed(cfg.seed, r));
    const double s = stats::pairwise_sum(path.values);
    ratio[r] = s * s / static_cast<double>(cfg.n);
  });
  const double est = stats::mean(ratio);
  const double se = stats::standard_error(ratio);
  if (!(std::isfinite(est) && est > 0.0))
    throw DegenerateVariance("Monte Carlo long-run variance is " + std::to_string(est) +
                             "; sigma^2 must lie in (0, inf)");
  return {est, MonteCarloVariance{cfg.replicates, cfg.n, se}};
}

/// Across-replicate estimate of Cov(X_1, X_{1+lag}) with a jackknife
/// standard error.
inline stats::Estimate empirical_covariance(const ModelSpec &model, std::size_t lag,
                                            std::size_t n, std::size_t replicates,
                                            std::uint64_t seed,
                                            unsigned workers = default_workers()) {
  if (n <= lag) throw std::invalid_argument("empirical_covariance needs n > lag");
  std::vector<double> first(replicates), second(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    const auto path = sample_path(model, n, derive_seed(seed, r));
    first[r] = path.values[0];
    second[r] = path.values[lag];
  });
  return stats::covariance_jackknife(first, second);
}

}  // namespace lweak

#endif  // LWEAK_COEFFICIENTS_HPP_
