#ifndef LWEAK_MODELS_HPP_
#define LWEAK_MODELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lweak/quadrature.hpp"
#include "lweak/rng.hpp"
#include "lweak/stats.hpp"

namespace lweak {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Innovation laws
// ---------------------------------------------------------------------------

/// Uniform on [a, b], shifted to mean zero.
struct UniformOnInterval {
  double a = -1.0;
  double b = 1.0;
  double half_width() const { return 0.5 * (b - a); }
};

struct Rademacher {};

/// Standard normal conditioned on [-bound, bound].
struct TruncatedGaussian {
  double bound = 3.0;
};

/// Compactly supported, symmetric, mean-zero innovation distribution.
class InnovationLaw {
 public:
  using Variant = std::variant<UniformOnInterval, Rademacher, TruncatedGaussian>;

  InnovationLaw() : InnovationLaw(UniformOnInterval{}) {}

  explicit InnovationLaw(Variant law) : law_(law) {
    std::visit(overloaded{
                   [](const UniformOnInterval &u) {
                     if (!(std::isfinite(u.a) && std::isfinite(u.b) && u.b > u.a))
                       throw std::invalid_argument(
                           "uniform law needs finite a < b");
                   },
                   [](const Rademacher &) {},
                   [](const TruncatedGaussian &g) {
                     if (!(std::isfinite(g.bound) && g.bound > 0.0))
                       throw std::invalid_argument(
                           "truncated gaussian needs bound > 0");
                   },
               },
               law_);
  }

  static InnovationLaw uniform(double a, double b) {
    return InnovationLaw(UniformOnInterval{a, b});
  }
  static InnovationLaw rademacher() { return InnovationLaw(Rademacher{}); }
  static InnovationLaw truncated_gaussian(double bound) {
    return InnovationLaw(TruncatedGaussian{bound});
  }

  const Variant &variant() const { return law_; }

  bool is_continuous() const {
    return !std::holds_alternative<Rademacher>(law_);
  }

  /// Radius of the (centred) support: |xi| <= support_radius() almost surely.
  double support_radius() const {
    return std::visit(overloaded{
                          [](const UniformOnInterval &u) { return u.half_width(); },
                          [](const Rademacher &) { return 1.0; },
                          [](const TruncatedGaussian &g) { return g.bound; },
                      },
                      law_);
  }

  double variance() const {
    return std::visit(
        overloaded{
            [](const UniformOnInterval &u) {
              const double w = u.b - u.a;
              return w * w / 12.0;
            },
            [](const Rademacher &) { return 1.0; },
            [](const TruncatedGaussian &g) {
              const double B = g.bound;
              const double mass = std::erf(B / std::numbers::sqrt2);
              const double pdf = std::exp(-0.5 * B * B) / std::sqrt(2.0 * std::numbers::pi);
              return 1.0 - 2.0 * B * pdf / mass;
            },
        },
        law_);
  }

  /// E f(xi). Continuous laws are integrated by adaptive quadrature.
  template <class F>
  double expect(F &&f) const {
    return std::visit(
        overloaded{
            [&](const UniformOnInterval &u) {
              const double h = u.half_width();
              return integrate([&](double x) { return f(x); }, -h, h) / (2.0 * h);
            },
            [&](const Rademacher &) { return 0.5 * (f(1.0) + f(-1.0)); },
            [&](const TruncatedGaussian &g) {
              const double B = g.bound;
              const double norm = std::sqrt(2.0 * std::numbers::pi) *
                                  std::erf(B / std::numbers::sqrt2);
              return integrate([&](double x) { return f(x) * std::exp(-0.5 * x * x); },
                               -B, B) /
                     norm;
            },
        },
        law_);
  }

  /// Moment generating function E exp(s xi).
  double mgf(double s) const {
    return std::visit(
        overloaded{
            [&](const UniformOnInterval &u) {
              const double z = s * u.half_width();
              return z == 0.0 ? 1.0 : std::sinh(z) / z;
            },
            [&](const Rademacher &) { return std::cosh(s); },
            [&](const TruncatedGaussian &g) {
              // exp(s x - x^2/2) peaks at x = s; shift by the maximum over the
              // support so the integrand stays O(1).
              const double B = g.bound;
              const double x_star = std::clamp(s, -B, B);
              const double shift = s * x_star - 0.5 * x_star * x_star;
              const double body = integrate(
                  [&](double x) { return std::exp(s * x - 0.5 * x * x - shift); }, -B, B);
              const double norm = std::sqrt(2.0 * std::numbers::pi) *
                                  std::erf(B / std::numbers::sqrt2);
              return std::exp(shift + std::log(body / norm));
            },
        },
        law_);
  }

  /// Characteristic function E cos(s xi); real because every law is symmetric.
  double characteristic(double s) const {
    return std::visit(overloaded{
                          [&](const UniformOnInterval &u) {
                            const double z = s * u.half_width();
                            return z == 0.0 ? 1.0 : std::sin(z) / z;
                          },
                          [&](const Rademacher &) { return std::cos(s); },
                          [&](const TruncatedGaussian &) {
                            return expect([s](double x) { return std::cos(s * x); });
                          },
                      },
                      law_);
  }

  /// Distribution function of the centred law; nullopt for discrete laws.
  std::optional<double> cdf(double x) const {
    return std::visit(
        overloaded{
            [&](const UniformOnInterval &u) -> std::optional<double> {
              const double h = u.half_width();
              return std::clamp((x + h) / (2.0 * h), 0.0, 1.0);
            },
            [](const Rademacher &) -> std::optional<double> { return std::nullopt; },
            [&](const TruncatedGaussian &g) -> std::optional<double> {
              const double B = g.bound;
              const double xc = std::clamp(x, -B, B);
              const double lo = stats::normal_cdf(-B);
              return (stats::normal_cdf(xc) - lo) / (stats::normal_cdf(B) - lo);
            },
        },
        law_);
  }

  double sample(Engine &engine) const {
    return std::visit(overloaded{
                          [&](const UniformOnInterval &u) {
                            return u.half_width() * uniform_pm1(engine);
                          },
                          [&](const Rademacher &) { return coin(engine) ? 1.0 : -1.0; },
                          [&](const TruncatedGaussian &g) {
                            // Rejection from the uniform envelope on [-B, B].
                            for (;;) {
                              const double x = g.bound * uniform_pm1(engine);
                              if (uniform01(engine) < std::exp(-0.5 * x * x)) return x;
                            }
                          },
                      },
                      law_);
  }

  std::string name() const {
    return std::visit(overloaded{
                          [](const UniformOnInterval &) { return std::string("uniform"); },
                          [](const Rademacher &) { return std::string("rademacher"); },
                          [](const TruncatedGaussian &) {
                            return std::string("truncated_gaussian");
                          },
                      },
                      law_);
  }

 private:
  Variant law_;
};

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

struct IdentityTransform {};
/// g(x) = exp(-x).
struct NegExpTransform {};
/// g(x) = exp(-x^2 / beta) + x.
struct GaussBumpPlusX {
  double beta = 1.0;
};

class Transform {
 public:
  using Variant = std::variant<IdentityTransform, NegExpTransform, GaussBumpPlusX>;

  Transform() = default;
  explicit Transform(Variant t) : t_(t) {
    if (const auto *g = std::get_if<GaussBumpPlusX>(&t_)) {
      if (!(std::isfinite(g->beta) && g->beta > 0.0))
        throw std::invalid_argument("gauss-bump transform needs beta > 0");
    }
  }

  static Transform identity() { return Transform(IdentityTransform{}); }
  static Transform neg_exp() { return Transform(NegExpTransform{}); }
  static Transform gauss_bump_plus_x(double beta) {
    return Transform(GaussBumpPlusX{beta});
  }

  const Variant &variant() const { return t_; }

  double operator()(double x) const {
    return std::visit(overloaded{
                          [&](const IdentityTransform &) { return x; },
                          [&](const NegExpTransform &) { return std::exp(-x); },
                          [&](const GaussBumpPlusX &g) {
                            return std::exp(-x * x / g.beta) + x;
                          },
                      },
                      t_);
  }

  double derivative(double x) const {
    return std::visit(overloaded{
                          [](const IdentityTransform &) { return 1.0; },
                          [&](const NegExpTransform &) { return -std::exp(-x); },
                          [&](const GaussBumpPlusX &g) {
                            return 1.0 - 2.0 * x / g.beta * std::exp(-x * x / g.beta);
                          },
                      },
                      t_);
  }

  /// Range of |g'| over [lo, hi] as (min, max).
  std::pair<double, double> slope_range(double lo, double hi) const {
    if (lo > hi) std::swap(lo, hi);
    std::vector<double> candidates{lo, hi};
    if (const auto *g = std::get_if<GaussBumpPlusX>(&t_)) {
      const double x_star = std::sqrt(g->beta / 2.0);
      for (double x : {-x_star, x_star})
        if (x > lo && x < hi) candidates.push_back(x);
    }
    double mn = std::numeric_limits<double>::infinity();
    double mx = 0.0;
    for (double x : candidates) {
      const double d = std::abs(derivative(x));
      mn = std::min(mn, d);
      mx = std::max(mx, d);
    }
    // g' of the gauss bump changes sign on [lo, hi] when its minimum is <= 0.
    if (const auto *g = std::get_if<GaussBumpPlusX>(&t_)) {
      const double x_star = std::sqrt(g->beta / 2.0);
      if (x_star > lo && x_star < hi && derivative(x_star) <= 0.0) mn = 0.0;
    }
    return {mn, mx};
  }

  /// Lipschitz norm of g restricted to [lo, hi].
  double lipschitz_on(double lo, double hi) const { return slope_range(lo, hi).second; }

  /// Lipschitz norm of the inverse g^{-1} on g([lo, hi]); infinite when g is
  /// not strictly monotone there.
  double inverse_lipschitz_on(double lo, double hi) const {
    const double mn = slope_range(lo, hi).first;
    return mn > 0.0 ? 1.0 / mn : std::numeric_limits<double>::infinity();
  }

  std::string name() const {
    return std::visit(overloaded{
                          [](const IdentityTransform &) { return std::string("identity"); },
                          [](const NegExpTransform &) { return std::string("neg_exp"); },
                          [](const GaussBumpPlusX &) {
                            return std::string("gauss_bump_plus_x");
                          },
                      },
                      t_);
  }

 private:
  Variant t_;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of g(scale * xi).
inline Moments transform_moments(const Transform &transform,
                                 const InnovationLaw &law, double scale) {
  return std::visit(
      overloaded{
          [&](const IdentityTransform &) {
            return Moments{0.0, scale * scale * law.variance()};
          },
          [&](const NegExpTransform &) {
            const double m1 = law.mgf(-scale);
            return Moments{m1, law.mgf(-2.0 * scale) - m1 * m1};
          },
          [&](const GaussBumpPlusX &) {
            const double m1 = law.expect([&](double x) { return transform(scale * x); });
            const double m2 = law.expect([&](double x) {
              const double y = transform(scale * x);
              return y * y;
            });
            return Moments{m1, m2 - m1 * m1};
          },
      },
      transform.variant());
}

// ---------------------------------------------------------------------------
// Model specifications
// ---------------------------------------------------------------------------

struct IID {
  InnovationLaw law;
};

/// X_n = sum_{j=1}^p alpha_j xi_{n-j}.
struct MovingAverage {
  std::vector<double> coeffs;
  InnovationLaw law;
};

/// X_n = g(sum_{i<=n} alpha_i xi_i) - E g(...). Nonstationary.
struct CumSumTransform {
  std::vector<double> coeffs;
  Transform transform;
  InnovationLaw law;
};

class ModelSpec {
 public:
  using Variant = std::variant<IID, MovingAverage, CumSumTransform>;

  ModelSpec() : ModelSpec(IID{}) {}

  explicit ModelSpec(Variant v) : v_(std::move(v)) {
    std::visit(overloaded{
                   [](const IID &) {},
                   [](const MovingAverage &m) {
                     if (m.coeffs.empty())
                       throw std::invalid_argument(
                           "moving average needs at least one coefficient");
                     for (double a : m.coeffs)
                       if (!std::isfinite(a))
                         throw std::invalid_argument(
                             "moving average coefficients must be finite");
                   },
                   [](const CumSumTransform &c) {
                     if (c.coeffs.empty())
                       throw std::invalid_argument(
                           "cumulative-sum model needs at least one coefficient");
                     for (double a : c.coeffs)
                       if (!(std::isfinite(a) && a > 0.0))
                         throw std::invalid_argument(
                             "cumulative-sum coefficients must be strictly positive");
                   },
               },
               v_);
  }

  static ModelSpec iid(InnovationLaw law) { return ModelSpec(IID{law}); }
  static ModelSpec moving_average(std::vector<double> coeffs, InnovationLaw law) {
    return ModelSpec(MovingAverage{std::move(coeffs), law});
  }
  static ModelSpec cumsum_transform(std::vector<double> coeffs, Transform transform,
                                    InnovationLaw law) {
    return ModelSpec(CumSumTransform{std::move(coeffs), transform, law});
  }

  const Variant &variant() const { return v_; }

  const InnovationLaw &law() const {
    return std::visit([](const auto &m) -> const InnovationLaw & { return m.law; }, v_);
  }

  bool is_stationary() const { return !std::holds_alternative<CumSumTransform>(v_); }

  /// Moving-average weights, with IID as the single weight 1.
  std::vector<double> ma_weights() const {
    if (const auto *ma = std::get_if<MovingAverage>(&v_)) return ma->coeffs;
    if (std::holds_alternative<IID>(v_)) return {1.0};
    throw std::invalid_argument("cumulative-sum model has no moving-average weights");
  }

  /// Almost-sure bound c with |X_n| <= c; only for stationary models.
  double almost_sure_bound() const {
    double s = 0.0;
    for (double a : ma_weights()) s += std::abs(a);
    return s * law().support_radius();
  }

  std::string variant_name() const {
    return std::visit(overloaded{
                          [](const IID &) { return std::string("iid"); },
                          [](const MovingAverage &) { return std::string("moving_average"); },
                          [](const CumSumTransform &) {
                            return std::string("cumsum_transform");
                          },
                      },
                      v_);
  }

 private:
  Variant v_;
};

inline void require_stationary(const ModelSpec &model, const char *operation) {
  if (!model.is_stationary())
    throw std::invalid_argument(std::string(operation) +
                                " requires a stationary model (iid or moving_average)");
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct SamplePath {
  std::vector<double> values;
  ModelSpec model;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
};

/// E g(sum_{i<=k} alpha_i xi_i) for k = 1..n.
inline std::vector<double> cumsum_transform_means(const CumSumTransform &m,
                                                  std::size_t n) {
  if (n > m.coeffs.size())
    throw std::invalid_argument("cumulative-sum model has fewer coefficients than n");
  std::vector<double> means(n, 0.0);
  std::visit(
      overloaded{
          [](const IdentityTransform &) {},
          [&](const NegExpTransform &) {
            // Independence factorises the moment generating function.
            double prod = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
              prod *= m.law.mgf(-m.coeffs[k]);
              means[k] = prod;
            }
          },
          [&](const GaussBumpPlusX &g) {
            // exp(-x^2/beta) = E cos(sqrt(2/beta) Z x) for Z ~ N(0,1), so
            // E exp(-S^2/beta) = E_Z prod_i phi(alpha_i sqrt(2/beta) Z).
            const double scale = std::sqrt(2.0 / g.beta);
            for (std::size_t k = 0; k < n; ++k) {
              auto integrand = [&](double z) {
                double prod = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
                for (std::size_t i = 0; i <= k; ++i)
                  prod *= m.law.characteristic(m.coeffs[i] * scale * z);
                return prod;
              };
              means[k] = integrate(integrand, -12.0, 12.0);
            }
          },
      },
      m.transform.variant());
  return means;
}

/// Centred realisation of length n. Innovations are drawn in a fixed order,
/// so a shorter path is always a prefix of a longer one with the same seed.
inline SamplePath sample_path(const ModelSpec &model, std::size_t n,
                              std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_path needs n >= 1");
  Engine engine(seed);
  SamplePath path{std::vector<double>(n), model, seed};
  auto &x = path.values;
  std::visit(
      overloaded{
          [&](const IID &m) {
            for (auto &v : x) v = m.law.sample(engine);
          },
          [&](const MovingAverage &m) {
            const std::size_t p = m.coeffs.size();
            // Ring buffer of the last p innovations; slot (t mod p) holds
            // xi_t. Burn-in fills xi_{1-p}..xi_0.
            std::vector<double> ring(p);
            for (std::size_t k = 0; k < p; ++k) ring[k] = m.law.sample(engine);
            std::size_t newest = p - 1;  // slot of xi_{n-1} when producing X_n
            for (std::size_t i = 0; i < n; ++i) {
              double s = 0.0;
              for (std::size_t j = 0; j < p; ++j)
                s += m.coeffs[j] * ring[(newest + p - j) % p];
              x[i] = s;
              newest = (newest + 1) % p;
              ring[newest] = m.law.sample(engine);
            }
          },
          [&](const CumSumTransform &m) {
            const auto means = cumsum_transform_means(m, n);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              s += m.coeffs[i] * m.law.sample(engine);
              x[i] = m.transform(s) - means[i];
            }
          },
      },
      model.variant());
  return path;
}

/// Cov(X_1, X_{1+lag}) in closed form for iid and moving-average models.
inline std::optional<double> analytic_covariance(const ModelSpec &model,
                                                 std::size_t lag) {
  if (!model.is_stationary()) return std::nullopt;
  const auto w = model.ma_weights();
  if (lag >= w.size()) return 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j + lag < w.size(); ++j) s += w[j] * w[j + lag];
  return model.law().variance() * s;
}

}  // namespace lweak

#endif  // LWEAK_MODELS_HPP_
