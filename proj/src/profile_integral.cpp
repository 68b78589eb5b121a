#include "conegreen/profile_integral.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace conegreen {

double profile_integral(double p, double d, double eps) {
  const double a = p + d / 2.0;
  if (!(a > 1.0))
    throw std::domain_error("profile integral diverges: p + d/2 = " + std::to_string(a) + " <= 1");
  if (!(eps >= 0.0)) throw std::domain_error("profile integral: eps must be >= 0");
  if (std::isinf(eps)) return 0.0;

  auto integrand = [a](double z) {
    if (z <= 0.0) return 0.0;
    return std::exp(-a * std::log(z) - 0.5 / z);
  };
  boost::math::quadrature::exp_sinh<double> rule;
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      rule.integrate(integrand, eps, std::numeric_limits<double>::infinity(), 1e-14, &error, &l1);
  return value;
}

}  // namespace conegreen
