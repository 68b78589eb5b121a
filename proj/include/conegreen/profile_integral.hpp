#pragma once

namespace conegreen {

/// Integral of z^{-p-d/2} exp(-1/(2z)) over (eps, infinity).
///
/// Converges at infinity only for p + d/2 > 1; otherwise std::domain_error.
/// Adaptive double-exponential quadrature, absolute error below 1e-10.
double profile_integral(double p, double d, double eps = 0.0);

}  // namespace conegreen
