#ifndef LWEAK_QUADRATURE_HPP_
#define LWEAK_QUADRATURE_HPP_

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lweak {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kQuadratureTolerance = 1e-10;

/// Adaptive Gauss-Kronrod (61 point) integral of `f` over [a, b]. The error
/// estimate must fall below `rel_tol` times the L1 norm of the integrand,
/// otherwise QuadratureError is thrown rather than returning a rough value.
template <class F>
double integrate(F &&f, double a, double b,
                 double rel_tol = kQuadratureTolerance) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, 20, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > rel_tol * l1) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b
        << "]: error estimate " << error << " exceeds " << rel_tol
        << " * L1 norm " << l1;
    throw QuadratureError(msg.str());
  }
  return value;
}

}  // namespace lweak

#endif  // LWEAK_QUADRATURE_HPP_
