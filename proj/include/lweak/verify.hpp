#ifndef LWEAK_VERIFY_HPP_
#define LWEAK_VERIFY_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lweak/blocks.hpp"
#include "lweak/bounds.hpp"
#include "lweak/coefficients.hpp"
#include "lweak/models.hpp"
#include "lweak/parallel.hpp"
#include "lweak/rng.hpp"
#include "lweak/stats.hpp"

namespace lweak {

struct MCConfig {
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  double error_multiplier = 3.0;
  unsigned workers = default_workers();

  void validate() const {
    if (replicates < 100) throw std::invalid_argument("MCConfig: replicates must be >= 100");
    if (!(error_multiplier >= 0.0))
      throw std::invalid_argument("MCConfig: error_multiplier must be >= 0");
  }
};

enum class Verdict { Dominated, Violated, BoundInvalid };

inline const char *to_string(Verdict v) {
  switch (v) {
    case Verdict::Dominated: return "DOMINATED";
    case Verdict::Violated: return "VIOLATED";
    case Verdict::BoundInvalid: return "BOUND_INVALID";
  }
  return "?";
}

inline Verdict verdict_from_string(const std::string &s) {
  if (s == "DOMINATED") return Verdict::Dominated;
  if (s == "VIOLATED") return Verdict::Violated;
  if (s == "BOUND_INVALID") return Verdict::BoundInvalid;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

/// One Monte Carlo estimate confronted with one bound. VIOLATED iff the bound
/// is valid and estimate - error_multiplier * se > bound.
struct VerificationReport {
  std::string check;
  std::string param;
  double estimate = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool valid = true;
  Verdict verdict = Verdict::Dominated;
  std::uint64_t seed = 0;
  std::size_t replicates = 0;
};

inline VerificationReport make_report(std::string check, std::string param, double estimate,
                                      double se, double bound, bool valid, const MCConfig &cfg) {
  VerificationReport r{std::move(check), std::move(param), estimate, se, bound, valid,
                       Verdict::Dominated, cfg.seed, cfg.replicates};
  if (!valid)
    r.verdict = Verdict::BoundInvalid;
  else if (estimate - cfg.error_multiplier * se > bound)
    r.verdict = Verdict::Violated;
  return r;
}

inline bool any_violated(const std::vector<VerificationReport> &reports) {
  return std::any_of(reports.begin(), reports.end(),
                     [](const auto &r) { return r.verdict == Verdict::Violated; });
}

namespace detail {

inline std::string fmt_param(std::initializer_list<std::pair<const char *, double>> kv) {
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (const auto &[k, v] : kv) {
    if (!first) os << ';';
    os << k << '=' << v;
    first = false;
  }
  return os.str();
}

/// Row-major matrix of `replicates` paths of length n.
inline std::vector<double> simulate_paths(const ModelSpec &model, std::size_t n,
                                          const MCConfig &cfg) {
  std::vector<double> out(cfg.replicates * n);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto path = sample_path(model, n, derive_seed(cfg.seed, r));
    std::copy(path.values.begin(), path.values.end(), out.begin() + r * n);
  });
  return out;
}

}  // namespace detail

/// CLT bias allowance b(n) = 2 / sqrt(n), a harness tolerance for the
/// finite-n distance to the Gaussian limit.
inline double clt_bias_allowance(std::size_t n) { return 2.0 / std::sqrt(static_cast<double>(n)); }

// ---------------------------------------------------------------------------
// Definition-level covariance inequality
// ---------------------------------------------------------------------------

/// Continuous piecewise-linear function on the real line: slope slopes[i]
/// between breakpoints[i-1] and breakpoints[i], and f(0) = value_at_zero.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> breakpoints, std::vector<double> slopes,
                  double value_at_zero = 0.0)
      : breaks_(std::move(breakpoints)), slopes_(std::move(slopes)), v0_(value_at_zero) {
    if (slopes_.size() != breaks_.size() + 1)
      throw std::invalid_argument("piecewise-linear: need breakpoints.size()+1 slopes");
    if (!std::is_sorted(breaks_.begin(), breaks_.end()) ||
        std::adjacent_find(breaks_.begin(), breaks_.end()) != breaks_.end())
      throw std::invalid_argument("piecewise-linear: breakpoints must be strictly increasing");
    for (double s : slopes_)
      if (!std::isfinite(s)) throw std::invalid_argument("piecewise-linear: slopes must be finite");
  }

  static PiecewiseLinear identity() { return PiecewiseLinear({}, {1.0}); }
  static PiecewiseLinear clamp(double c) { return PiecewiseLinear({-c, c}, {0.0, 1.0, 0.0}); }

  /// Integral of the slope from 0 to x.
  double operator()(double x) const { return v0_ + integral_from_zero(x); }

  /// Exact Lipschitz norm, max |slope|.
  double lipschitz() const {
    double m = 0.0;
    for (double s : slopes_) m = std::max(m, std::abs(s));
    return m;
  }

  const std::vector<double> &breakpoints() const { return breaks_; }
  const std::vector<double> &slopes() const { return slopes_; }

 private:
  double primitive(double x) const {
    // Integral from the leftmost breakpoint (or 0 without breakpoints) to x.
    if (breaks_.empty()) return slopes_[0] * x;
    double acc = 0.0;
    double left = breaks_.front();
    if (x <= left) return slopes_[0] * (x - left);
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
      const double right = i + 1 < breaks_.size() ? breaks_[i + 1]
                                                  : std::numeric_limits<double>::infinity();
      const double hi = std::min(x, right);
      acc += slopes_[i + 1] * (hi - left);
      if (x <= right) break;
      left = right;
    }
    return acc;
  }
  double integral_from_zero(double x) const { return primitive(x) - primitive(0.0); }

  std::vector<double> breaks_;
  std::vector<double> slopes_;
  double v0_;
};

/// Monte Carlo |Cov(f(sum_{i in I} X_i), g(sum_{j in J} X_j))| against
/// ||f|| ||g|| sum_{i in I} sum_{j in J} gamma_{|j-i|}. Indices are 1-based;
/// composing with the sum keeps the Lipschitz norm (w.r.t. the l1 norm on
/// the block) equal to max |slope|.
inline VerificationReport check_lipschitz_cov(const ModelSpec &model, const PiecewiseLinear &f,
                                              const PiecewiseLinear &g,
                                              const std::vector<std::size_t> &I,
                                              const std::vector<std::size_t> &J, std::size_t n,
                                              const MCConfig &cfg) {
  cfg.validate();
  if (I.empty() || J.empty()) throw std::invalid_argument("check_lipschitz_cov: I and J must be nonempty");
  for (auto i : I)
    if (i < 1 || i > n) throw std::invalid_argument("check_lipschitz_cov: index out of 1..n");
  for (auto j : J) {
    if (j < 1 || j > n) throw std::invalid_argument("check_lipschitz_cov: index out of 1..n");
    if (std::find(I.begin(), I.end(), j) != I.end())
      throw std::invalid_argument("check_lipschitz_cov: I and J must be disjoint");
  }
  const auto gamma = gamma_sequence(model);
  double dep = 0.0;
  for (auto i : I)
    for (auto j : J) dep += gamma[i > j ? i - j : j - i];
  const double bound = f.lipschitz() * g.lipschitz() * dep;

  std::vector<double> fx(cfg.replicates), gx(cfg.replicates);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto path = sample_path(model, n, derive_seed(cfg.seed, r));
    double si = 0.0, sj = 0.0;
    for (auto i : I) si += path.values[i - 1];
    for (auto j : J) sj += path.values[j - 1];
    fx[r] = f(si);
    gx[r] = g(sj);
  });
  const auto cov = stats::covariance_jackknife(fx, gx);
  return make_report("cov", detail::fmt_param({{"n", double(n)}, {"|I|", double(I.size())},
                                               {"|J|", double(J.size())}}),
                     std::abs(cov.value), cov.standard_error, bound, true, cfg);
}

// ---------------------------------------------------------------------------
// Tail inequality for the odd-block sum
// ---------------------------------------------------------------------------

struct TailCheckOptions {
  double alpha = 2.0;
  /// Overrides d_n; by default d_n = (4 alpha c^2 / sigma^2) (p_n^2 / n) log n,
  /// the bounded-variable schedule constant evaluated at the actual p_n.
  std::optional<double> d;
};

/// Bound parameters used by check_tail_domination.
inline BoundParams tail_bound_params(const ModelSpec &model, const BlockScheme &scheme,
                                     const TailCheckOptions &opts = {}) {
  require_stationary(model, "tail check");
  BoundParams bp;
  bp.c = model.almost_sure_bound();
  if (!(bp.c > 0.0)) throw std::invalid_argument("tail check: model has zero almost-sure bound");
  bp.sigma2 = long_run_variance(model).sigma2;
  bp.p = scheme.p;
  bp.n = scheme.n;
  const double nd = static_cast<double>(scheme.n);
  const double p = static_cast<double>(scheme.p);
  bp.d = opts.d.value_or(4.0 * opts.alpha * bp.c * bp.c / bp.sigma2 * p * p / nd * std::log(nd));
  return bp;
}

/// Keeps the grid points where tail_bound reports valid = true.
inline std::vector<double> valid_tail_grid(const BoundParams &params, double v_pn,
                                           const std::vector<double> &grid) {
  std::vector<double> out;
  for (double x : grid)
    if (tail_bound(x, params, v_pn).valid) out.push_back(x);
  return out;
}

/// Empirical P(Z_od > x) against the explicit tail bound, one report per x.
/// Standard errors are binomial; below 10 exceedances the Clopper-Pearson
/// lower limit at the matching confidence level replaces the normal one.
inline std::vector<VerificationReport> check_tail_domination(const ModelSpec &model,
                                                             const BlockScheme &scheme,
                                                             const std::vector<double> &x_grid,
                                                             const MCConfig &cfg,
                                                             const TailCheckOptions &opts = {}) {
  cfg.validate();
  if (!model.is_stationary())
    throw std::invalid_argument("tail check requires a bounded stationary model");
  const auto params = tail_bound_params(model, scheme, opts);
  const double v_pn = cox_grimmett(gamma_sequence(model), scheme.p);

  std::vector<double> z(cfg.replicates);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto path = sample_path(model, scheme.n, derive_seed(cfg.seed, r));
    z[r] = decompose(path.values, scheme).z_odd;
  });
  std::sort(z.begin(), z.end());

  const double R = static_cast<double>(cfg.replicates);
  const double alpha_level = stats::normal_two_sided_alpha(cfg.error_multiplier);
  std::vector<VerificationReport> out;
  for (double x : x_grid) {
    const auto exceed = static_cast<std::size_t>(z.end() - std::upper_bound(z.begin(), z.end(), x));
    const double phat = static_cast<double>(exceed) / R;
    double se = 0.0;
    if (exceed < 10) {
      const double lower = stats::clopper_pearson_lower(exceed, cfg.replicates, alpha_level);
      se = cfg.error_multiplier > 0.0 ? (phat - lower) / cfg.error_multiplier : 0.0;
    } else {
      se = std::sqrt(phat * (1.0 - phat) / R);
    }
    const auto b = tail_bound(x, params, v_pn);
    out.push_back(make_report("tail",
                              detail::fmt_param({{"x", x}, {"n", double(scheme.n)},
                                                 {"p", double(scheme.p)}, {"d", params.d}}),
                              phat, se, b.value, b.valid, cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Characteristic-function discrepancy
// ---------------------------------------------------------------------------

/// |E prod e^{itX_j} - prod E e^{itX_j}| for j = 1..n against
/// 4 t^2 sum (n-j) gamma_j. Joint and marginal means come from the same
/// replicates; the standard error is that of the complex estimate, from
/// per-replicate influence values.
inline std::vector<VerificationReport> check_newman(const ModelSpec &model, std::size_t n,
                                                    const std::vector<double> &t_grid,
                                                    const MCConfig &cfg) {
  cfg.validate();
  if (n < 2 || n > 16) throw std::invalid_argument("check_newman: need 2 <= n <= 16");
  const auto gamma = gamma_sequence(model);
  const auto paths = detail::simulate_paths(model, n, cfg);
  const std::size_t R = cfg.replicates;
  using cplx = std::complex<double>;

  auto complex_mean = [](const std::vector<double> &re, const std::vector<double> &im) {
    return cplx(stats::mean(re), stats::mean(im));
  };

  std::vector<VerificationReport> out;
  for (double t : t_grid) {
    std::vector<double> re(R), im(R);
    for (std::size_t r = 0; r < R; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += paths[r * n + j];
      re[r] = std::cos(t * s);
      im[r] = std::sin(t * s);
    }
    const cplx joint = complex_mean(re, im);
    std::vector<cplx> phi(n);
    std::vector<std::vector<double>> mre(n, std::vector<double>(R)), mim(n, std::vector<double>(R));
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t r = 0; r < R; ++r) {
        mre[j][r] = std::cos(t * paths[r * n + j]);
        mim[j][r] = std::sin(t * paths[r * n + j]);
      }
      phi[j] = complex_mean(mre[j], mim[j]);
    }
    // prod_{k != j} phi_k via prefix and suffix products.
    std::vector<cplx> prefix(n + 1, 1.0), suffix(n + 1, 1.0);
    for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] * phi[j];
    for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] * phi[j];
    const cplx diff = joint - prefix[n];

    std::vector<double> ire(R), iim(R);
    for (std::size_t r = 0; r < R; ++r) {
      cplx inf = cplx(re[r], im[r]) - joint;
      for (std::size_t j = 0; j < n; ++j)
        inf -= prefix[j] * suffix[j + 1] * (cplx(mre[j][r], mim[j][r]) - phi[j]);
      ire[r] = inf.real();
      iim[r] = inf.imag();
    }
    const double se = std::sqrt((stats::variance(ire) + stats::variance(iim)) / double(R));
    out.push_back(make_report("newman", detail::fmt_param({{"n", double(n)}, {"t", t}}),
                              std::abs(diff), se, newman_discrepancy_bound(gamma, n, t), true,
                              cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quasi-association counterexample
// ---------------------------------------------------------------------------

struct QuasiAssociationRow {
  double alpha1 = 0.0;
  double cov_x = 0.0;        // Cov(X_1, X_2) = alpha1^2 Var(xi)
  double cov_y = 0.0;        // Cov(Y_1, Y_2) = E g(alpha2 xi) Var g(alpha1 xi)
  double inverse_norm = 0.0; // ||f|| for f = -log on the support of (Y_1, Y_2)
  double eq1_rhs = 0.0;      // ||f||^2 Cov(Y_1, Y_2)
  bool eq1_holds = true;     // Cov(X_1, X_2) <= ||f||^2 Cov(Y_1, Y_2)
  double forward_norm = 0.0; // ||g|| on the support of (X_1, X_2)
  double ldep_bound = 0.0;   // ||g||^2 Cov(X_1, X_2)
  bool ldep_holds = true;    // |Cov(Y_1, Y_2)| <= ||g||^2 Cov(X_1, X_2)
};

struct QuasiAssociationResult {
  double alpha2 = 0.0;
  std::vector<QuasiAssociationRow> rows;
  std::optional<double> first_violation;  // smallest alpha1 where the inequality fails
  std::vector<VerificationReport> reports;

  /// Counterexample found and the L-weak dependence bound held throughout.
  bool confirmed() const {
    return first_violation.has_value() &&
           std::all_of(rows.begin(), rows.end(), [](const auto &r) { return r.ldep_holds; });
  }
};

/// Largest alpha1 for which the closed-form covariance of (Y_1, Y_2) is also
/// cross-checked by simulation; beyond it the moments of e^{-alpha1 xi} are
/// too heavy-tailed for a meaningful Monte Carlo error bar.
inline constexpr double kQuasiMonteCarloMaxAlpha = 4.0;

/// X_1 = alpha1 xi_1, X_2 = alpha1 xi_1 + alpha2 xi_2 and Y = e^{-X}.
/// Evaluates both sides of Cov(X_1,X_2) <= ||f||^2 Cov(Y_1,Y_2), f = g^{-1},
/// with support-restricted Lipschitz norms, over the alpha1 grid.
inline QuasiAssociationResult check_quasi_association_counterexample(
    const std::vector<double> &alpha1_grid, double alpha2, const InnovationLaw &law,
    const MCConfig &cfg) {
  cfg.validate();
  if (!std::holds_alternative<UniformOnInterval>(law.variant()))
    throw std::invalid_argument("quasi-association check needs a uniform innovation law");
  if (!(alpha2 > 0.0)) throw std::invalid_argument("quasi-association check needs alpha2 > 0");
  const auto g = Transform::neg_exp();
  const double h = law.support_radius();
  const auto m2 = transform_moments(g, law, alpha2);

  QuasiAssociationResult res;
  res.alpha2 = alpha2;
  for (double a1 : alpha1_grid) {
    if (!(a1 > 0.0)) throw std::invalid_argument("quasi-association check needs alpha1 > 0");
    QuasiAssociationRow row;
    row.alpha1 = a1;
    row.cov_x = a1 * a1 * law.variance();
    row.cov_y = m2.mean * transform_moments(g, law, a1).variance;
    // X_1 and X_2 both live in [-R, R].
    const double R = (a1 + alpha2) * h;
    row.inverse_norm = g.inverse_lipschitz_on(-R, R);
    row.eq1_rhs = row.inverse_norm * row.inverse_norm * row.cov_y;
    row.eq1_holds = row.cov_x <= row.eq1_rhs;
    row.forward_norm = g.lipschitz_on(-R, R);
    row.ldep_bound = row.forward_norm * row.forward_norm * row.cov_x;
    row.ldep_holds = std::abs(row.cov_y) <= row.ldep_bound;
    if (!row.eq1_holds && !res.first_violation) res.first_violation = a1;

    const auto param = detail::fmt_param({{"alpha1", a1}, {"alpha2", alpha2}});
    res.reports.push_back(make_report("quasi_eq1", param, row.cov_x, 0.0, row.eq1_rhs, true, cfg));
    res.reports.push_back(
        make_report("quasi_ldep", param, std::abs(row.cov_y), 0.0, row.ldep_bound, true, cfg));
    if (a1 <= kQuasiMonteCarloMaxAlpha) {
      const auto model = ModelSpec::cumsum_transform({a1, alpha2}, g, law);
      std::vector<double> y1(cfg.replicates), y2(cfg.replicates);
      parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
        const auto path = sample_path(model, 2, derive_seed(cfg.seed, r));
        y1[r] = path.values[0];
        y2[r] = path.values[1];
      });
      const auto mc = stats::covariance_jackknife(y1, y2);
      res.reports.push_back(make_report("quasi_cov_mc", param, std::abs(mc.value - row.cov_y),
                                        mc.standard_error, 0.0, true, cfg));
    }
    res.rows.push_back(row);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Strong law rate
// ---------------------------------------------------------------------------

/// Quantile (level q) of |S_n / n| across replicates for each n in the grid.
/// One path of length max(n_grid) per replicate; shorter sums are prefixes.
inline std::vector<double> abs_mean_quantiles(const ModelSpec &model,
                                              const std::vector<std::size_t> &n_grid,
                                              const MCConfig &cfg, double q = 0.99) {
  cfg.validate();
  if (n_grid.empty()) throw std::invalid_argument("slln: empty n grid");
  const std::size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());
  const std::size_t k = n_grid.size();
  std::vector<double> vals(cfg.replicates * k);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto path = sample_path(model, n_max, derive_seed(cfg.seed, r));
    std::vector<double> prefix(n_max + 1, 0.0);
    for (std::size_t i = 0; i < n_max; ++i) prefix[i + 1] = prefix[i] + path.values[i];
    for (std::size_t g = 0; g < k; ++g)
      vals[r * k + g] = std::abs(prefix[n_grid[g]] / static_cast<double>(n_grid[g]));
  });
  std::vector<double> out(k);
  std::vector<double> col(cfg.replicates);
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) col[r] = vals[r * k + g];
    out[g] = stats::quantile(col, q);
  }
  return out;
}

struct SllnFit {
  std::vector<std::size_t> n_grid;
  std::vector<double> quantiles;
  double slope = 0.0;
  double slope_se = 0.0;
  double band_low = 0.0;   // slope -+ error_multiplier * slope_se
  double band_high = 0.0;
  VerificationReport report;
};

/// Log-log slope of the high quantile of |S_n/n| against n.
inline SllnFit slln_rate_fit(const ModelSpec &model, const std::vector<std::size_t> &n_grid,
                             const MCConfig &cfg, double q = 0.99) {
  long_run_variance(model);  // rejects degenerate sigma^2 = 0
  if (n_grid.size() < 3) throw std::invalid_argument("slln: need at least three grid points");
  SllnFit fit;
  fit.n_grid = n_grid;
  fit.quantiles = abs_mean_quantiles(model, n_grid, cfg, q);
  std::vector<double> lx, ly;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    lx.push_back(std::log(static_cast<double>(n_grid[g])));
    ly.push_back(std::log(fit.quantiles[g]));
  }
  const auto line = stats::fit_line(lx, ly);
  fit.slope = line.slope;
  fit.slope_se = line.slope_standard_error;
  fit.band_low = fit.slope - cfg.error_multiplier * fit.slope_se;
  fit.band_high = fit.slope + cfg.error_multiplier * fit.slope_se;
  // Distance to the n^{-1/2} scaling against the +-0.05 acceptance band.
  fit.report = make_report("slln", detail::fmt_param({{"q", q}, {"slope", fit.slope}}),
                           std::abs(fit.slope + 0.5), fit.slope_se, 0.05, true, cfg);
  return fit;
}

// ---------------------------------------------------------------------------
// Central limit theorem
// ---------------------------------------------------------------------------

struct CltResult {
  double ks = 0.0;
  double threshold = 0.0;  // 1.358/sqrt(R) + b(n)
  double sigma2 = 0.0;
  double p_nonpositive = 0.0;  // empirical P(S_n/sqrt(n) <= 0)
  double p_nonpositive_se = 0.0;
  VerificationReport report;
};

inline CltResult clt_ks_distance(const ModelSpec &model, std::size_t n, const MCConfig &cfg,
                                 std::optional<double> sigma2 = std::nullopt) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("clt: n must be positive");
  CltResult res;
  res.sigma2 = sigma2 ? *sigma2 : long_run_variance(model).sigma2;
  if (!(res.sigma2 > 0.0)) throw DegenerateVariance("clt: sigma^2 must be positive");
  std::vector<double> s(cfg.replicates);
  const double root_n = std::sqrt(static_cast<double>(n));
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto path = sample_path(model, n, derive_seed(cfg.seed, r));
    s[r] = stats::pairwise_sum(path.values) / root_n;
  });
  const double sd = std::sqrt(res.sigma2);
  res.ks = stats::ks_statistic(s, [sd](double x) { return stats::normal_cdf(x, 0.0, sd); });
  res.threshold = stats::ks_critical_05(cfg.replicates) + clt_bias_allowance(n);
  const double R = static_cast<double>(cfg.replicates);
  res.p_nonpositive =
      static_cast<double>(std::count_if(s.begin(), s.end(), [](double v) { return v <= 0.0; })) / R;
  res.p_nonpositive_se = std::sqrt(res.p_nonpositive * (1.0 - res.p_nonpositive) / R);
  res.report = make_report("clt", detail::fmt_param({{"n", double(n)}, {"sigma2", res.sigma2}}),
                           res.ks, 0.0, res.threshold, true, cfg);
  return res;
}

// ---------------------------------------------------------------------------
// Partial-sum process
// ---------------------------------------------------------------------------

/// xi_n(k/n) = n^{-1/2} sum_{j<=k} X_j for k = 0..n.
struct PartialSumPath {
  std::size_t n = 0;
  std::vector<double> values;  // values[k] = xi_n(k/n)

  double time(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(n); }

  /// Right-continuous step function: xi_n(t) = values[floor(n t)].
  double at(double t) const {
    if (t <= 0.0) return 0.0;
    const auto k = std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n) * t)));
    return values[k];
  }
};

inline PartialSumPath partial_sum_path(std::span<const double> x) {
  PartialSumPath p;
  p.n = x.size();
  p.values.assign(x.size() + 1, 0.0);
  const double root_n = std::sqrt(static_cast<double>(x.size()));
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    s += x[k];
    p.values[k + 1] = s / root_n;
  }
  return p;
}

/// Increments of xi_n at 0 < u_1 < ... < u_k <= 1: each variance against
/// (u_s - u_{s-1}) sigma^2, each cross covariance against 0, with tolerance
/// error_multiplier * se + b(n).
inline std::vector<VerificationReport> fclt_increment_check(const ModelSpec &model,
                                                            const std::vector<double> &times,
                                                            std::size_t n, const MCConfig &cfg) {
  cfg.validate();
  if (times.empty() || times.size() > 5)
    throw std::invalid_argument("fclt: need between 1 and 5 times");
  for (std::size_t s = 0; s < times.size(); ++s) {
    if (!(times[s] > 0.0 && times[s] <= 1.0))
      throw std::invalid_argument("fclt: times must lie in (0, 1]");
    if (s > 0 && !(times[s] > times[s - 1]))
      throw std::invalid_argument("fclt: times must be strictly increasing");
  }
  const double sigma2 = long_run_variance(model).sigma2;
  const std::size_t k = times.size();
  std::vector<std::vector<double>> inc(k, std::vector<double>(cfg.replicates));
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    const auto path = sample_path(model, n, derive_seed(cfg.seed, r));
    const auto ps = partial_sum_path(path.values);
    double prev = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      const double cur = ps.at(times[s]);
      inc[s][r] = cur - prev;
      prev = cur;
    }
  });
  const double b = clt_bias_allowance(n);
  const double R = static_cast<double>(cfg.replicates);
  std::vector<VerificationReport> out;
  double prev_u = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    const double var = stats::variance(inc[s]);
    const double m = stats::mean(inc[s]);
    std::vector<double> sq(cfg.replicates);
    for (std::size_t r = 0; r < cfg.replicates; ++r) sq[r] = (inc[s][r] - m) * (inc[s][r] - m);
    const double se = std::sqrt(stats::variance(sq) / R);
    const double target = (times[s] - prev_u) * sigma2;
    out.push_back(make_report("fclt_var",
                              detail::fmt_param({{"s", double(s + 1)}, {"u", times[s]},
                                                 {"var", var}, {"target", target}}),
                              std::abs(var - target), se, b, true, cfg));
    prev_u = times[s];
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t c = a + 1; c < k; ++c) {
      const auto cov = stats::covariance_jackknife(inc[a], inc[c]);
      out.push_back(make_report("fclt_cov",
                                detail::fmt_param({{"s", double(a + 1)}, {"s2", double(c + 1)},
                                                   {"cov", cov.value}}),
                                std::abs(cov.value), cov.standard_error, b, true, cfg));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Empirical process
// ---------------------------------------------------------------------------

/// Marginal distribution function used for the probability integral
/// transform: exact for iid continuous laws, otherwise estimated from a
/// pre-pass of `kMarginalPrepassDraws` draws and linearly interpolated.
class MarginalCdf {
 public:
  static constexpr std::size_t kMarginalPrepassDraws = 1'000'000;
  static constexpr std::size_t kKnots = 1001;

  MarginalCdf(const ModelSpec &model, std::uint64_t seed) {
    require_stationary(model, "marginal distribution function");
    if (const auto *iid = std::get_if<IID>(&model.variant())) {
      if (!iid->law.is_continuous())
        throw std::invalid_argument("marginal distribution function unavailable for a discrete law");
      law_ = iid->law;
      // Maximum density of the law, attained at 0 for both continuous laws.
      lipschitz_ = std::visit(
          overloaded{
              [](const UniformOnInterval &u) { return 1.0 / (u.b - u.a); },
              [](const TruncatedGaussian &g) {
                return 1.0 / (std::sqrt(2.0 * std::numbers::pi) * std::erf(g.bound / std::numbers::sqrt2));
              },
              [](const Rademacher &) { return std::numeric_limits<double>::infinity(); },
          },
          iid->law.variant());
      return;
    }
    // Stationary path from a seed that cannot collide with replicate seeds.
    const auto path = sample_path(model, kMarginalPrepassDraws, mix_seed(~seed));
    std::vector<double> sorted = path.values;
    std::sort(sorted.begin(), sorted.end());
    xs_.resize(kKnots);
    ps_.resize(kKnots);
    for (std::size_t i = 0; i < kKnots; ++i) {
      const double q = static_cast<double>(i) / static_cast<double>(kKnots - 1);
      xs_[i] = stats::quantile_sorted(sorted, q);
      ps_[i] = q;
    }
    lipschitz_ = 0.0;
    for (std::size_t i = 1; i < kKnots; ++i) {
      const double dx = xs_[i] - xs_[i - 1];
      const double slope = dx > 0.0 ? (ps_[i] - ps_[i - 1]) / dx
                                     : std::numeric_limits<double>::infinity();
      lipschitz_ = std::max(lipschitz_, slope);
    }
  }

  double operator()(double x) const {
    if (law_) return *law_->cdf(x);
    if (x < xs_.front()) return 0.0;
    if (x >= xs_.back()) return 1.0;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
    const double dx = xs_[i] - xs_[i - 1];
    return ps_[i - 1] + (dx > 0.0 ? (x - xs_[i - 1]) / dx : 0.0) * (ps_[i] - ps_[i - 1]);
  }

  /// Lipschitz norm of the transform (maximum density); infinite for atoms.
  double lipschitz() const { return lipschitz_; }
  bool exact() const { return law_.has_value(); }

 private:
  std::optional<InnovationLaw> law_;
  std::vector<double> xs_, ps_;
  double lipschitz_ = 0.0;
};

/// zeta_n(t) = sqrt(n) (n^{-1} sum_j 1{U_j <= t} - t) with U_j = F(X_j).
struct EmpiricalProcessPath {
  std::vector<double> grid;
  std::vector<double> values;
  double transform_lipschitz = 0.0;
};

inline EmpiricalProcessPath empirical_process_path(std::span<const double> uniforms,
                                                   const std::vector<double> &grid) {
  EmpiricalProcessPath ep;
  ep.grid = grid;
  std::vector<double> u(uniforms.begin(), uniforms.end());
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  for (double t : grid) {
    if (t <= 0.0) {
      ep.values.push_back(0.0);
      continue;
    }
    const auto count = static_cast<double>(std::upper_bound(u.begin(), u.end(), t) - u.begin());
    ep.values.push_back(std::sqrt(n) * (count / n - std::min(t, 1.0)));
  }
  return ep;
}

inline EmpiricalProcessPath empirical_process_path(const ModelSpec &model, std::size_t n,
                                                   const std::vector<double> &grid,
                                                   std::uint64_t seed) {
  const MarginalCdf cdf(model, seed);
  const auto path = sample_path(model, n, seed);
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = cdf(path.values[j]);
  auto ep = empirical_process_path(u, grid);
  ep.transform_lipschitz = cdf.lipschitz();
  return ep;
}

/// Gamma(s, t) = sum_{k=1}^K Cov(1{U_1 <= s}, 1{U_k <= t}) across replicates;
/// K defaults to the gamma support length + 5.
inline stats::Estimate estimate_gamma_operator(const ModelSpec &model, double s, double t,
                                               std::optional<std::size_t> K,
                                               const MCConfig &cfg) {
  cfg.validate();
  if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("gamma operator: s and t must lie in [0, 1]");
  const std::size_t k_max = K.value_or(gamma_sequence(model).support_length().value_or(0) + 5);
  if (k_max < 1) throw std::invalid_argument("gamma operator: K must be >= 1");
  const MarginalCdf cdf(model, cfg.seed);
  const std::size_t R = cfg.replicates;
  std::vector<double> a(R);
  std::vector<std::vector<double>> b(k_max, std::vector<double>(R));
  parallel_for(R, cfg.workers, [&](std::size_t r) {
    const auto path = sample_path(model, k_max, derive_seed(cfg.seed, r));
    a[r] = cdf(path.values[0]) <= s ? 1.0 : 0.0;
    for (std::size_t k = 0; k < k_max; ++k) b[k][r] = cdf(path.values[k]) <= t ? 1.0 : 0.0;
  });
  const double a_mean = stats::mean(a);
  std::vector<double> influence(R, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < k_max; ++k) {
    const double b_mean = stats::mean(b[k]);
    std::vector<double> prod(R);
    for (std::size_t r = 0; r < R; ++r) {
      prod[r] = (a[r] - a_mean) * (b[k][r] - b_mean);
      influence[r] += prod[r];
    }
    total += stats::pairwise_sum(prod) / static_cast<double>(R - 1);
  }
  return {total, stats::standard_error(influence)};
}

}  // namespace lweak

#endif  // LWEAK_VERIFY_HPP_
