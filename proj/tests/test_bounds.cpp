#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lweak/bounds.hpp"
#include "lweak/coefficients.hpp"
#include "lweak/stats.hpp"

using namespace lweak;

namespace {

// Plain-loop evaluation of the odd-block moment bound.
double mgf_oracle(double t, double c, double s2, double n, double p, double d, double v, long r) {
  double sum = 0.0;
  for (long j = 0; j <= r - 2; ++j) sum += std::exp(j * t * p * (2 * t * s2 * d - c));
  return t * t * std::exp(t * c * n / 2) * p * v * sum + std::exp(t * t * s2 * n * d);
}

double tail_oracle(double x, double c, double s2, double n, double p, double d, double v, long r) {
  const double t = x / (2 * s2 * n * d);
  double sum = 0.0;
  for (long j = 0; j <= r - 2; ++j) sum += std::exp(j * t * p * (2 * t * s2 * d - c));
  return t * t * std::exp(t * c * n / 2) * p * v * std::exp(-t * x) * sum +
         std::exp(-x * x / (4 * s2 * n * d));
}

bool mentions(const BoundEvaluation &e, const std::string &cond) {
  for (const auto &c : e.violated_conditions)
    if (c == cond) return true;
  return false;
}

BoundParams params(double c, double s2, std::size_t p, double d, std::size_t n) {
  BoundParams b;
  b.c = c;
  b.sigma2 = s2;
  b.p = p;
  b.d = d;
  b.n = n;
  return b;
}

const char *kThreshold = "t <= ((d_n-1)/d_n)/(c p_n)";
const char *kSeries = "2 t sigma^2 d_n - c < 0";

}  // namespace

TEST(GeometricSum, MatchesDirectSummation) {
  for (double L : {-2.0, -0.5, -1e-3, -1e-9, 0.0, 1e-10, 1e-6, 0.3}) {
    for (std::size_t m : {1u, 2u, 7u, 50u}) {
      double direct = 0.0;
      for (std::size_t j = 0; j < m; ++j) direct += std::exp(double(j) * L);
      EXPECT_NEAR(geometric_sum(L, m), direct, 1e-12 * direct) << "L=" << L << " m=" << m;
    }
  }
  EXPECT_TRUE(std::isinf(log_geometric_sum(0.1, 0)));
}

TEST(LaplaceBlockBound, Examples) {
  const auto bp = params(1.0, 1.0, 4, 2.0, 100);
  const auto zero = laplace_block_bound(0.0, bp);
  EXPECT_EQ(zero.value, 1.0);
  EXPECT_TRUE(zero.valid);
  EXPECT_DOUBLE_EQ(bp.t_threshold(), 0.125);
  const auto a = laplace_block_bound(0.1, bp);
  EXPECT_TRUE(a.valid);
  EXPECT_NEAR(a.value, std::exp(0.16), 1e-15);
  EXPECT_NEAR(a.value, 1.17351, 1e-5);
  const auto b = laplace_block_bound(0.2, bp);
  EXPECT_FALSE(b.valid);
  EXPECT_TRUE(mentions(b, kThreshold));
  EXPECT_NEAR(b.value, std::exp(0.64), 1e-14);
}

TEST(LaplaceBlockBound, ReportsBadParameters) {
  auto bp = params(1.0, 1.0, 4, 1.0, 100);
  const auto e = laplace_block_bound(0.0, bp);
  EXPECT_FALSE(e.valid);
  EXPECT_TRUE(mentions(e, "d_n > 1"));
  bp = params(1.0, 1.0, 60, 2.0, 100);
  EXPECT_TRUE(mentions(laplace_block_bound(0.0, bp), "1 <= p_n <= n/2"));
}

TEST(OddSumMgfBound, Examples) {
  const auto bp = params(1.0, 1.0, 32, 4.0, 1024);
  // v = 0 leaves the product bound alone, exactly.
  for (double t : {0.0, 0.003, 0.01})
    EXPECT_EQ(odd_sum_mgf_bound(t, bp, 0.0).value, std::exp(t * t * 1.0 * 1024 * 4.0));
  const auto e = odd_sum_mgf_bound(0.01, bp, 0.1);
  EXPECT_TRUE(e.valid);
  const double oracle = mgf_oracle(0.01, 1, 1, 1024, 32, 4, 0.1, 16);
  EXPECT_NEAR(e.value, oracle, 1e-10 * oracle);
  // r_n = 2: the sum is the single j = 0 term.
  const auto two = params(1.0, 1.0, 25, 4.0, 100);
  ASSERT_EQ(two.r(), 2u);
  const double t = 0.005;
  EXPECT_NEAR(odd_sum_mgf_bound(t, two, 0.3).value,
              t * t * std::exp(t * 100 / 2.0) * 25 * 0.3 + std::exp(t * t * 100 * 4.0), 1e-14);
}

TEST(OddSumMgfBound, RandomParametersMatchLoop) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 64 + rng() % 4000;
    const std::size_t p = 1 + rng() % (n / 4);
    const double c = 0.5 + 3 * u(rng), s2 = 0.2 + 4 * u(rng), d = 1.1 + 20 * u(rng);
    const double v = 2 * u(rng);
    const auto bp = params(c, s2, p, d, n);
    const double t = bp.t_threshold() * u(rng);
    const auto e = odd_sum_mgf_bound(t, bp, v);
    EXPECT_TRUE(e.valid);
    const double oracle = mgf_oracle(t, c, s2, double(n), double(p), d, v, long(bp.r()));
    if (std::isfinite(oracle)) {
      EXPECT_NEAR(e.value, oracle, 1e-10 * oracle);
    }
  }
}

TEST(TailBound, Examples) {
  const auto bp = params(2.0, 4.0, 97, 5.0, 4096);
  for (double x : {10.0, 100.0, 300.0})
    EXPECT_EQ(tail_bound(x, bp, 0.0).value, std::exp(-x * x / (4 * 4.0 * 4096 * 5.0)));
  EXPECT_NEAR(tail_bound(1e-9, bp, 1.0).value, 1.0, 1e-12);
  EXPECT_EQ(tail_bound(0.0, bp, 1.0).value, 1.0);
  EXPECT_FALSE(tail_bound(-1.0, bp, 0.0).valid);
}

TEST(TailBound, EpsilonAtLeastCIsInvalid) {
  // x = n eps gives 2 t sigma^2 d_n - c = eps - c.
  const double n = 200, c = 1.0;
  const auto bp = params(c, 1.0, 1, 4.0, 200);
  for (double eps : {1.0, 1.5}) {
    const auto e = tail_bound(n * eps, bp, 0.5);
    EXPECT_FALSE(e.valid);
    EXPECT_TRUE(mentions(e, kSeries));
  }
  EXPECT_TRUE(tail_bound(n * 0.5, bp, 0.5).valid);
}

TEST(TailBound, RandomParametersMatchLoop) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = 64 + rng() % 4000;
    const std::size_t p = 1 + rng() % (n / 4);
    const double c = 0.5 + 3 * u(rng), s2 = 0.2 + 4 * u(rng), d = 1.1 + 20 * u(rng);
    const double v = 2 * u(rng);
    const auto bp = params(c, s2, p, d, n);
    const double x = 2 * s2 * double(n) * d * bp.t_threshold() * u(rng);
    const auto e = tail_bound(x, bp, v);
    const double oracle = tail_oracle(x, c, s2, double(n), double(p), d, v, long(bp.r()));
    if (!std::isfinite(oracle)) continue;
    EXPECT_NEAR(e.value, oracle, 1e-10 * oracle);
    ++checked;
  }
  EXPECT_GT(checked, 400);
}

TEST(TailBound, NonincreasingOnValidRegion) {
  const auto model = ModelSpec::moving_average({1.0, 1.0}, InnovationLaw::uniform(-1, 1));
  const std::size_t n = 4096, p = 97;
  const double c = 2.0, s2 = 4.0;
  const double d = 4 * 2.0 * c * c / s2 * double(p * p) / double(n) * std::log(double(n));
  const auto bp = params(c, s2, p, d, n);
  const double v = cox_grimmett(gamma_sequence(model), p);
  for (double vv : {0.0, v, 1e-3}) {
    double prev = INFINITY;
    int valid = 0;
    for (double x = 0.0; x <= c * double(n); x += 2.0) {
      const auto e = tail_bound(x, bp, vv);
      if (!e.valid) continue;
      ++valid;
      EXPECT_LE(e.value, prev) << "x=" << x << " v=" << vv;
      prev = e.value;
    }
    EXPECT_GT(valid, 100);
  }
}

TEST(TailBound, PureFunction) {
  const auto bp = params(1.3, 2.1, 13, 3.3, 999);
  const auto a = tail_bound(71.0, bp, 0.4);
  const auto b = tail_bound(71.0, bp, 0.4);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(odd_sum_mgf_bound(0.002, bp, 0.4).value, odd_sum_mgf_bound(0.002, bp, 0.4).value);
}

TEST(SllnSchedule, AdmissibleAcrossGrid) {
  std::vector<RateSchedule> s;
  for (int k = 8; k <= 20; ++k) s.push_back(slln_schedule(std::size_t(1) << k, 0.55, 2.0, 4.0, 2.0));
  for (const auto &r : s) {
    const double tcp = r.lemma_t * r.level * double(r.p);
    EXPECT_LE(tcp, r.d / 2.0);
    EXPECT_LE(tcp, 0.5 + 1e-12);
    EXPECT_LE(r.lemma_t, (r.d - 1) / r.d / (r.level * double(r.p)));
    EXPECT_DOUBLE_EQ(r.rate_exponent, 0.45);
  }
  const auto n0 = admissible_from(s);
  ASSERT_TRUE(n0.has_value());
  EXPECT_EQ(*n0, 256u);
}

TEST(SllnSchedule, RateRatioIsBounded) {
  const double alpha = 2.0, c = 1.5;
  for (int k = 8; k <= 20; ++k) {
    const double n = std::ldexp(1.0, k);
    const auto s = slln_schedule(std::size_t(n), 0.55, alpha, 0.7, c);
    EXPECT_NEAR(s.epsilon * std::pow(n, 0.45) / std::log(n), 4 * alpha * c, 1e-12 * 4 * alpha * c);
  }
}

TEST(SllnSchedule, HandEvaluation) {
  const double n = 1024, alpha = 2.0, s2 = 4.0, c = 2.0;
  const auto s = slln_schedule(1024, 0.55, alpha, s2, c);
  const double d = 4 * alpha * c * c / s2 * std::pow(n, 0.1) * std::log(n);
  const double eps = std::sqrt(4 * s2 * alpha * d * std::log(n) / n);
  EXPECT_EQ(s.p, 45u);
  EXPECT_NEAR(s.d, d, 1e-12 * d);
  EXPECT_NEAR(s.epsilon, eps, 1e-12 * eps);
  EXPECT_NEAR(s.lemma_t, eps / (2 * s2 * d), 1e-12 * s.lemma_t);
}

TEST(SllnSchedule, AdmissibilityFailsForSmallD) {
  // c^2 / sigma^2 tiny forces d_n < 2 at small n, so the threshold fails.
  const auto s = slln_schedule(256, 0.55, 1.01, 100.0, 0.1);
  EXPECT_FALSE(s.admissibility.valid);
}

TEST(Schedules, RejectBadInputs) {
  EXPECT_THROW(slln_schedule(1024, 0.5, 2, 1, 1), std::invalid_argument);
  EXPECT_THROW(slln_schedule(1024, 1.0, 2, 1, 1), std::invalid_argument);
  EXPECT_THROW(slln_schedule(1024, 1.2, 2, 1, 1), std::invalid_argument);
  EXPECT_THROW(slln_schedule(1024, 0.6, 1.0, 1, 1), std::invalid_argument);
  EXPECT_THROW(slln_schedule(1024, 0.6, 2, 0, 1), std::invalid_argument);
  EXPECT_THROW(slln_schedule(1024, 0.6, 2, 1, 0), std::invalid_argument);
  EXPECT_THROW(LaplaceCondition(3.0, 1.0), std::invalid_argument);
  EXPECT_THROW(LaplaceCondition(4.0, 0.0), std::invalid_argument);
  // tau must exceed alpha + 2(1 - theta) = 3.5 + 0.9.
  EXPECT_THROW(unbounded_schedule(4096, 0.55, 3.5, 1, LaplaceCondition(4.0, 1.0)), std::invalid_argument);
}

TEST(UnboundedSchedule, HandEvaluation) {
  const double n = 4096, alpha = 1.5, theta = 0.55, U = 1.0;
  const auto s = unbounded_schedule(4096, theta, alpha, 1.0, LaplaceCondition(4.0, U));
  const double L = std::log(n);
  const double d = alpha * std::pow(n, 2 * theta - 1) * L * L * L;
  const double eps2 = 4 * alpha * alpha * std::pow(n, 2 * theta - 2) * L * L * L;
  const double t = alpha + 2 * (1 - theta);
  EXPECT_EQ(s.p, 97u);
  EXPECT_NEAR(*s.truncation_level, L, 1e-15);
  EXPECT_NEAR(s.d, d, 1e-12 * d);
  EXPECT_NEAR(s.epsilon, std::sqrt(eps2), 1e-12 * s.epsilon);
  EXPECT_NEAR(*s.markov_t, 2.4, 1e-15);
  const double tail = 2 * n * U / (t * t * eps2) * std::exp(-t * L);
  EXPECT_NEAR(*s.tail_term, tail, 1e-12 * tail);
  EXPECT_TRUE(s.admissibility.valid);
}

TEST(UnboundedSchedule, EpsilonScaling) {
  for (double alpha : {1.2, 1.5, 2.0}) {
    for (int k = 8; k <= 20; ++k) {
      const double n = std::ldexp(1.0, k);
      const auto s = unbounded_schedule(std::size_t(n), 0.55, alpha, 1.0, LaplaceCondition(4.0, 1.0));
      EXPECT_NEAR(s.epsilon * std::pow(n, 0.45) / std::pow(std::log(n), 1.5), 2 * alpha, 1e-12);
      EXPECT_TRUE(s.admissibility.valid) << "n=" << n;
      EXPECT_LT(*s.markov_t, 4.0);
    }
  }
}

// The closed-form tail term equals U n^{1-alpha} / (2 alpha^2 t^2 (log n)^3),
// so log(term (log n)^3) is exactly linear in log n with slope 1 - alpha.
TEST(UnboundedSchedule, TailTermScaling) {
  const double alpha = 1.5;
  std::vector<double> lx, ly;
  for (int k = 8; k <= 20; ++k) {
    const double n = std::ldexp(1.0, k);
    const auto s = unbounded_schedule(std::size_t(n), 0.55, alpha, 1.0, LaplaceCondition(4.0, 1.0));
    lx.push_back(std::log(n));
    ly.push_back(std::log(*s.tail_term * std::pow(std::log(n), 3)));
  }
  const auto fit = stats::fit_line(lx, ly);
  EXPECT_NEAR(fit.slope, 1.0 - alpha, 1e-10);
}

TEST(TruncatedSecondMoment, Examples) {
  EXPECT_NEAR(truncated_second_moment_bound(2.0, std::log(100.0), 1.0, 4.0), 5e-5, 1e-18);
  EXPECT_LT(truncated_second_moment_bound(2.0, 400.0, 1.0, 4.0), 1e-300);
  EXPECT_DOUBLE_EQ(truncated_second_moment_bound(1.5, 3.0, 2.0, 4.0),
                   2.0 * truncated_second_moment_bound(1.5, 3.0, 1.0, 4.0));
  EXPECT_THROW(truncated_second_moment_bound(0.0, 1.0, 1.0, 4.0), std::invalid_argument);
  EXPECT_THROW(truncated_second_moment_bound(4.0, 1.0, 1.0, 4.0), std::invalid_argument);
}
