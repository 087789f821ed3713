#ifndef LWEAK_BLOCKS_HPP_
#define LWEAK_BLOCKS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lweak/models.hpp"

namespace lweak {

/// Alternating block scheme: 2 r_n blocks of length p_n, r_n = floor(n / 2p_n).
struct BlockScheme {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t r = 0;

  std::size_t covered() const { return 2 * p * r; }
};

inline BlockScheme block_scheme(std::size_t n, std::size_t p) {
  if (p < 1 || 2 * p > n)
    throw std::invalid_argument("block_scheme: need 1 <= p_n <= n/2 (n=" + std::to_string(n) +
                                ", p_n=" + std::to_string(p) + ")");
  BlockScheme s{n, p, n / (2 * p)};
  if (s.r == 0) throw std::invalid_argument("block_scheme: r_n = 0");
  return s;
}

/// p_n = floor(n^theta).
inline std::size_t block_length(std::size_t n, double theta) {
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), theta)));
}

struct BlockDecomposition {
  std::vector<double> blocks;  // Y_1..Y_{2r}
  double z_odd = 0.0;
  double z_even = 0.0;
  double remainder = 0.0;
};

inline BlockDecomposition decompose(std::span<const double> path, const BlockScheme &scheme) {
  if (path.size() != scheme.n)
    throw std::invalid_argument("decompose: path length " + std::to_string(path.size()) +
                                " does not match scheme n=" + std::to_string(scheme.n));
  BlockDecomposition d;
  d.blocks.resize(2 * scheme.r);
  for (std::size_t j = 0; j < d.blocks.size(); ++j) {
    double s = 0.0;
    for (std::size_t k = j * scheme.p; k < (j + 1) * scheme.p; ++k) s += path[k];
    d.blocks[j] = s;
    (j % 2 == 0 ? d.z_odd : d.z_even) += s;  // block index j+1 is odd when j is even
  }
  for (std::size_t k = scheme.covered(); k < scheme.n; ++k) d.remainder += path[k];
  return d;
}

inline BlockDecomposition decompose(const SamplePath &path, const BlockScheme &scheme) {
  return decompose(std::span<const double>(path.values), scheme);
}

/// Clamp g_c(x) = max(min(x, c), -c).
inline double clip(double x, double c) { return std::max(std::min(x, c), -c); }

/// X = (g_c(X) - m) + (X - g_c(X) - (mu - m)) + m + (mu - m), with m = E g_c(X)
/// and mu = E X, so both parts are centred.
struct TruncationSplit {
  double level = 0.0;
  std::vector<double> bounded;
  std::vector<double> unbounded;
  double bounded_mean = 0.0;
  double unbounded_mean = 0.0;
};

inline TruncationSplit truncate_path(std::span<const double> path, double c,
                                     double mean_of_clipped, double overall_mean = 0.0) {
  if (!(c > 0.0)) throw std::invalid_argument("truncate_path needs c > 0");
  TruncationSplit s;
  s.level = c;
  s.bounded_mean = mean_of_clipped;
  s.unbounded_mean = overall_mean - mean_of_clipped;
  s.bounded.resize(path.size());
  s.unbounded.resize(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) {
    const double g = clip(path[j], c);
    s.bounded[j] = g - s.bounded_mean;
    s.unbounded[j] = (path[j] - g) - s.unbounded_mean;
  }
  return s;
}

}  // namespace lweak

#endif  // LWEAK_BLOCKS_HPP_
