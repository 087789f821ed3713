#ifndef LWEAK_CLI_HPP_
#define LWEAK_CLI_HPP_

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lweak/blocks.hpp"
#include "lweak/bounds.hpp"
#include "lweak/coefficients.hpp"
#include "lweak/io.hpp"
#include "lweak/models.hpp"
#include "lweak/report.hpp"
#include "lweak/verify.hpp"

namespace lweak::cli {

inline constexpr const char *kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

inline const std::vector<std::string> &check_names() {
  static const std::vector<std::string> names{"cov",  "tail", "newman", "quasi",
                                              "slln", "clt",  "fclt",   "emp"};
  return names;
}

/// Thrown for configuration errors detected by the front end itself.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// `start:stop:step` (inclusive of stop within 1e-12) or a comma list.
inline std::vector<double> parse_grid(const std::string &text) {
  auto num = [&](const std::string &s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception &) {
      throw UsageError("bad grid '" + text + "': '" + s + "' is not a number");
    }
    if (used != s.size() || !std::isfinite(v))
      throw UsageError("bad grid '" + text + "': '" + s + "' is not a finite number");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (parts.empty()) throw UsageError("empty grid");

  std::vector<double> out;
  if (sep == ',') {
    for (const auto &p : parts) out.push_back(num(p));
    return out;
  }
  if (parts.size() != 3) throw UsageError("bad grid '" + text + "': expected start:stop:step");
  const double start = num(parts[0]), stop = num(parts[1]), step = num(parts[2]);
  if (!(step > 0.0)) throw UsageError("bad grid '" + text + "': step must be positive");
  if (stop < start) throw UsageError("bad grid '" + text + "': stop < start");
  const double span = (stop - start) / step;
  if (span > 1e7) throw UsageError("bad grid '" + text + "': too many points");
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-12)) + 1;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(std::min(start + static_cast<double>(i) * step, stop));
  return out;
}

inline std::vector<std::size_t> parse_size_grid(const std::string &text) {
  std::vector<std::size_t> out;
  for (double v : parse_grid(text)) {
    if (!(v >= 1.0 && v == std::floor(v)))
      throw UsageError("grid '" + text + "' must contain positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

/// Inclusive 1-based index range `a:b`.
inline std::vector<std::size_t> parse_index_range(const std::string &text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("index range '" + text + "' must be a:b");
  std::size_t a = 0, b = 0;
  try {
    a = std::stoul(text.substr(0, colon));
    b = std::stoul(text.substr(colon + 1));
  } catch (const std::exception &) {
    throw UsageError("index range '" + text + "' must be a:b with integers");
  }
  if (a < 1 || b < a) throw UsageError("index range '" + text + "' needs 1 <= a <= b");
  std::vector<std::size_t> out;
  for (std::size_t i = a; i <= b; ++i) out.push_back(i);
  return out;
}

struct RunConfig {
  std::string model_path;
  std::string output = "-";
  std::string format = "csv";
  std::size_t n = 4096;
  std::optional<std::size_t> p;
  double theta = 0.55;
  double alpha = 2.0;
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
  double error_multiplier = 3.0;
  std::string check;
  std::string x_grid, t_grid, n_grid, times, alpha1_grid = "1:50:1";
  double alpha2 = 1.0;
  double quantile = 0.99;
  double s = 0.3, t = 0.7;
  std::optional<std::size_t> K;
  std::optional<double> c, sigma2, v, d;
  std::string i_range = "1:1", j_range = "2:2";
  double f_clamp = 0.0, g_clamp = 0.0;
  std::size_t n_max = 10;
  std::string schedule_kind = "bounded";
  double tau = 4.0, U = 1.0;
};

namespace detail {

inline MCConfig mc_config(const RunConfig &rc) {
  MCConfig cfg;
  cfg.replicates = rc.replicates;
  cfg.seed = rc.seed;
  cfg.workers = std::max(1u, rc.workers);
  cfg.error_multiplier = rc.error_multiplier;
  cfg.validate();
  return cfg;
}

inline ModelSpec require_model(const RunConfig &rc) {
  if (rc.model_path.empty()) throw UsageError("--model is required");
  return load_model(rc.model_path);
}

inline void write_text(const RunConfig &rc, const std::string &text, std::ostream &out) {
  if (rc.output.empty() || rc.output == "-")
    out << text;
  else
    write_atomic(rc.output, text);
}

inline std::string num(double v) { return format_number(v); }

inline int run_coeffs(const RunConfig &rc, std::ostream &out) {
  const auto model = require_model(rc);
  if (rc.n_max < 1) throw UsageError("--n-max must be >= 1");
  const auto gamma = gamma_sequence(model);
  std::ostringstream os;
  os << "k,gamma,v\n";
  for (std::size_t k = 1; k <= rc.n_max; ++k)
    os << k << ',' << num(gamma[k]) << ',' << num(cox_grimmett(gamma, k)) << '\n';
  write_text(rc, os.str(), out);
  return kOk;
}

inline std::size_t block_length_for(const RunConfig &rc) {
  if (rc.p) return *rc.p;
  if (!(rc.theta > 0.0 && rc.theta < 1.0)) throw UsageError("--theta must lie in (0, 1)");
  return block_length(rc.n, rc.theta);
}

inline int run_decompose(const RunConfig &rc, std::ostream &out) {
  const auto model = require_model(rc);
  const auto scheme = block_scheme(rc.n, block_length_for(rc));
  const auto path = sample_path(model, rc.n, rc.seed);
  const auto d = decompose(path, scheme);
  std::ostringstream os;
  os << "j,parity,block\n";
  for (std::size_t j = 0; j < d.blocks.size(); ++j)
    os << j + 1 << ',' << (j % 2 == 0 ? "odd" : "even") << ',' << num(d.blocks[j]) << '\n';
  os << "# n=" << scheme.n << " p=" << scheme.p << " r=" << scheme.r << " z_odd=" << num(d.z_odd)
     << " z_even=" << num(d.z_even) << " remainder=" << num(d.remainder) << '\n';
  write_text(rc, os.str(), out);
  return kOk;
}

inline int run_bound(const RunConfig &rc, std::ostream &out) {
  if (!(rc.theta > 0.5 && rc.theta < 1.0))
    throw UsageError("--theta must lie in (1/2, 1), got " + num(rc.theta));
  if (!(rc.alpha > 1.0)) throw UsageError("--alpha must exceed 1");
  if (rc.x_grid.empty()) throw UsageError("--x-grid is required");
  const auto grid = parse_grid(rc.x_grid);
  const auto scheme = block_scheme(rc.n, block_length_for(rc));
  BoundParams bp;
  double v_pn = 0.0;
  if (!rc.model_path.empty()) {
    const auto model = load_model(rc.model_path);
    TailCheckOptions opts;
    opts.alpha = rc.alpha;
    opts.d = rc.d;
    bp = tail_bound_params(model, scheme, opts);
    v_pn = cox_grimmett(gamma_sequence(model), scheme.p);
  } else {
    if (!rc.c || !rc.sigma2 || !rc.v)
      throw UsageError("bound needs --model or all of --c, --sigma2, --v");
    if (!(*rc.c > 0.0)) throw UsageError("--c must be positive");
    if (!(*rc.sigma2 > 0.0)) throw UsageError("--sigma2 must be positive");
    if (!(*rc.v >= 0.0)) throw UsageError("--v must be nonnegative");
    bp.c = *rc.c;
    bp.sigma2 = *rc.sigma2;
    bp.p = scheme.p;
    bp.n = scheme.n;
    const double nd = static_cast<double>(rc.n), p = static_cast<double>(scheme.p);
    bp.d = rc.d.value_or(4.0 * rc.alpha * bp.c * bp.c / bp.sigma2 * p * p / nd * std::log(nd));
    v_pn = *rc.v;
  }
  std::ostringstream os;
  os << "x,bound,valid\n";
  for (double x : grid) {
    const auto e = tail_bound(x, bp, v_pn);
    os << num(x) << ',' << num(e.value) << ',' << (e.valid ? "true" : "false") << '\n';
  }
  write_text(rc, os.str(), out);
  return kOk;
}

inline int run_schedule(const RunConfig &rc, std::ostream &out) {
  const auto ns = rc.n_grid.empty() ? std::vector<std::size_t>{rc.n} : parse_size_grid(rc.n_grid);
  const double sigma2 = rc.sigma2.value_or(1.0);
  std::ostringstream os;
  os << "n,p,d,epsilon,level,lemma_t,tail_term,valid\n";
  bool all_valid = true;
  for (auto n : ns) {
    RateSchedule s;
    if (rc.schedule_kind == "bounded")
      s = slln_schedule(n, rc.theta, rc.alpha, sigma2, rc.c.value_or(1.0));
    else if (rc.schedule_kind == "unbounded")
      s = unbounded_schedule(n, rc.theta, rc.alpha, sigma2, LaplaceCondition(rc.tau, rc.U));
    else
      throw UsageError("--kind must be bounded or unbounded");
    all_valid = all_valid && s.admissibility.valid;
    os << n << ',' << s.p << ',' << num(s.d) << ',' << num(s.epsilon) << ',' << num(s.level)
       << ',' << num(s.lemma_t) << ',' << (s.tail_term ? num(*s.tail_term) : std::string("nan"))
       << ',' << (s.admissibility.valid ? "true" : "false") << '\n';
  }
  write_text(rc, os.str(), out);
  return all_valid ? kOk : kFailure;
}

inline std::vector<VerificationReport> verify_reports(const RunConfig &rc) {
  const auto cfg = mc_config(rc);
  const auto &ch = rc.check;
  if (ch == "quasi") {
    auto law = InnovationLaw::uniform(-1.0, 1.0);
    if (!rc.model_path.empty()) law = load_model(rc.model_path).law();
    return check_quasi_association_counterexample(parse_grid(rc.alpha1_grid), rc.alpha2, law, cfg)
        .reports;
  }
  const auto model = require_model(rc);
  if (ch == "cov") {
    auto fn = [](double c) { return c > 0.0 ? PiecewiseLinear::clamp(c) : PiecewiseLinear::identity(); };
    return {check_lipschitz_cov(model, fn(rc.f_clamp), fn(rc.g_clamp), parse_index_range(rc.i_range),
                                parse_index_range(rc.j_range), rc.n, cfg)};
  }
  if (ch == "tail") {
    const auto scheme = block_scheme(rc.n, block_length_for(rc));
    TailCheckOptions opts;
    opts.alpha = rc.alpha;
    opts.d = rc.d;
    std::vector<double> grid;
    if (!rc.x_grid.empty()) {
      grid = parse_grid(rc.x_grid);
    } else {
      // 21 points across the region where the bound's hypotheses hold.
      const auto bp = tail_bound_params(model, scheme, opts);
      const double nd = static_cast<double>(rc.n);
      const double x_max =
          std::min(2.0 * bp.sigma2 * nd * bp.d * bp.t_threshold(), bp.c * nd * (1.0 - 1e-9));
      for (int i = 0; i <= 20; ++i) grid.push_back(x_max * i / 20.0);
    }
    return check_tail_domination(model, scheme, grid, cfg, opts);
  }
  if (ch == "newman") {
    const std::size_t n = rc.n > 16 ? 4 : rc.n;
    return check_newman(model, n, parse_grid(rc.t_grid.empty() ? "0.25,0.5,1" : rc.t_grid), cfg);
  }
  if (ch == "slln") {
    const auto grid = parse_size_grid(rc.n_grid.empty() ? "256,512,1024,2048,4096,8192,16384,32768,65536"
                                                        : rc.n_grid);
    return {slln_rate_fit(model, grid, cfg, rc.quantile).report};
  }
  if (ch == "clt") return {clt_ks_distance(model, rc.n, cfg, rc.sigma2).report};
  if (ch == "fclt")
    return fclt_increment_check(model, parse_grid(rc.times.empty() ? "0.25,0.5,1" : rc.times), rc.n,
                                cfg);
  if (ch == "emp") {
    std::vector<VerificationReport> reports;
    const auto ep = empirical_process_path(model, rc.n, {0.0, 1.0}, cfg.seed);
    reports.push_back(make_report(
        "emp_endpoints",
        lweak::detail::fmt_param({{"n", double(rc.n)}, {"lipschitz", ep.transform_lipschitz}}),
        std::abs(ep.values[0]) + std::abs(ep.values[1]), 0.0, 0.0, true, cfg));
    const auto est = estimate_gamma_operator(model, rc.s, rc.t, rc.K, cfg);
    if (std::holds_alternative<IID>(model.variant())) {
      const double exact = std::min(rc.s, rc.t) - rc.s * rc.t;
      reports.push_back(make_report("emp_gamma",
                                    lweak::detail::fmt_param({{"s", rc.s}, {"t", rc.t}, {"gamma", est.value}}),
                                    std::abs(est.value - exact), est.standard_error, 0.0, true, cfg));
    } else {
      const auto diag = estimate_gamma_operator(model, rc.s, rc.s, rc.K, cfg);
      reports.push_back(make_report("emp_gamma_diag",
                                    lweak::detail::fmt_param({{"s", rc.s}, {"gamma", diag.value}}),
                                    -diag.value, diag.standard_error, 0.0, true, cfg));
      reports.push_back(make_report("emp_gamma",
                                    lweak::detail::fmt_param({{"s", rc.s}, {"t", rc.t}, {"gamma", est.value}}),
                                    est.value, est.standard_error,
                                    std::numeric_limits<double>::infinity(), true, cfg));
    }
    return reports;
  }
  throw UsageError("unknown check '" + ch + "' (see --list-checks)");
}

}  // namespace detail

/// Parses argv (argv[0] is the program name) and dispatches. Diagnostics go
/// to `err` as a single line.
inline int run(const std::vector<std::string> &argv, std::ostream &out = std::cout,
               std::ostream &err = std::cerr) {
  RunConfig rc;
  CLI::App app{"Numerical checks for L-weakly dependent sequences", "lweak"};
  bool version = false, list_checks = false;
  app.add_flag("--version", version, "Print the version and exit");
  app.add_flag("--list-checks", list_checks, "List the verify checks and exit");
  app.require_subcommand(0, 1);

  auto add_model = [&](CLI::App *sub) { sub->add_option("--model", rc.model_path, "Model JSON file"); };
  auto add_output = [&](CLI::App *sub) {
    sub->add_option("--output,-o", rc.output, "Output path ('-' for stdout)");
  };

  auto *coeffs = app.add_subcommand("coeffs", "Dependence coefficients gamma_k and tail sums v(k)");
  add_model(coeffs);
  add_output(coeffs);
  coeffs->add_option("--n-max", rc.n_max, "Largest k");

  auto *decomp = app.add_subcommand("decompose", "Block decomposition of one sample path");
  add_model(decomp);
  add_output(decomp);
  decomp->add_option("--n", rc.n, "Path length");
  decomp->add_option("--theta", rc.theta, "p_n = floor(n^theta)");
  decomp->add_option("--p", rc.p, "Block length (overrides --theta)");
  decomp->add_option("--seed", rc.seed, "Seed");

  auto *bound = app.add_subcommand("bound", "Tail bound for the odd-block sum over an x grid");
  add_model(bound);
  add_output(bound);
  bound->add_option("--n", rc.n, "Sample size");
  bound->add_option("--theta", rc.theta, "Block exponent in (1/2, 1)");
  bound->add_option("--p", rc.p, "Block length (overrides --theta)");
  bound->add_option("--alpha", rc.alpha, "Schedule exponent > 1");
  bound->add_option("--x-grid", rc.x_grid, "start:stop:step or comma list");
  bound->add_option("--c", rc.c, "Almost-sure bound (without --model)");
  bound->add_option("--sigma2", rc.sigma2, "Long-run variance (without --model)");
  bound->add_option("--v", rc.v, "v(p_n) (without --model)");
  bound->add_option("--d", rc.d, "Override d_n");

  auto *sched = app.add_subcommand("schedule", "Rate schedules and their admissibility");
  add_output(sched);
  sched->add_option("--kind", rc.schedule_kind, "bounded or unbounded");
  sched->add_option("--n", rc.n, "Sample size");
  sched->add_option("--n-grid", rc.n_grid, "Sample sizes (grid)");
  sched->add_option("--theta", rc.theta, "Block exponent in (1/2, 1)");
  sched->add_option("--alpha", rc.alpha, "Rate exponent > 1");
  sched->add_option("--sigma2", rc.sigma2, "Long-run variance (default 1)");
  sched->add_option("--c", rc.c, "Almost-sure bound, bounded kind (default 1)");
  sched->add_option("--tau", rc.tau, "Laplace radius, unbounded kind");
  sched->add_option("--U", rc.U, "Laplace constant, unbounded kind");

  auto *verify = app.add_subcommand("verify", "Monte Carlo check of an inequality or limit theorem");
  add_model(verify);
  add_output(verify);
  verify->add_option("--check", rc.check, "cov|tail|newman|quasi|slln|clt|fclt|emp")->required();
  verify->add_option("--out", rc.format, "Report format: csv or json");
  verify->add_option("--replicates", rc.replicates, "Monte Carlo replicates");
  verify->add_option("--seed", rc.seed, "Master seed");
  verify->add_option("--workers", rc.workers, "Worker threads");
  verify->add_option("--error-multiplier", rc.error_multiplier, "Standard errors of slack");
  verify->add_option("--n", rc.n, "Sample size");
  verify->add_option("--theta", rc.theta, "Block exponent (tail)");
  verify->add_option("--p", rc.p, "Block length (tail)");
  verify->add_option("--alpha", rc.alpha, "Schedule exponent for d_n (tail)");
  verify->add_option("--d", rc.d, "Override d_n (tail)");
  verify->add_option("--x-grid", rc.x_grid, "Thresholds (tail)");
  verify->add_option("--t-grid", rc.t_grid, "Frequencies (newman)");
  verify->add_option("--n-grid", rc.n_grid, "Sample sizes (slln)");
  verify->add_option("--quantile", rc.quantile, "Quantile level (slln)");
  verify->add_option("--sigma2", rc.sigma2, "Known long-run variance (clt)");
  verify->add_option("--times", rc.times, "Increment times (fclt)");
  verify->add_option("--alpha1-grid", rc.alpha1_grid, "alpha1 grid (quasi)");
  verify->add_option("--alpha2", rc.alpha2, "alpha2 (quasi)");
  verify->add_option("--s", rc.s, "s (emp)");
  verify->add_option("--t", rc.t, "t (emp)");
  verify->add_option("--K", rc.K, "Truncation order (emp)");
  verify->add_option("--i-range", rc.i_range, "Index block I as a:b (cov)");
  verify->add_option("--j-range", rc.j_range, "Index block J as a:b (cov)");
  verify->add_option("--f-clamp", rc.f_clamp, "f = clamp at this level, 0 = identity (cov)");
  verify->add_option("--g-clamp", rc.g_clamp, "g = clamp at this level, 0 = identity (cov)");

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  if (version) {
    out << "lweak " << kVersion << '\n';
    return kOk;
  }
  if (list_checks) {
    for (const auto &c : check_names()) out << c << '\n';
    return kOk;
  }

  try {
    if (*coeffs) return detail::run_coeffs(rc, out);
    if (*decomp) return detail::run_decompose(rc, out);
    if (*bound) return detail::run_bound(rc, out);
    if (*sched) return detail::run_schedule(rc, out);
    if (*verify) {
      const auto format = report_format_from_string(rc.format);
      const auto reports = detail::verify_reports(rc);
      emit_report(reports, format, rc.output, out);
      return any_violated(reports) ? kFailure : kOk;
    }
    err << "error: a subcommand is required (coeffs, decompose, bound, schedule, verify)\n";
    return kUsage;
  } catch (const std::logic_error &e) {
    // invalid_argument, domain_error (degenerate variance) and model format errors
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace lweak::cli

#endif  // LWEAK_CLI_HPP_
