#pragma once

// Special functions used by the distribution families. Arguments of the
// gamma-type functions are positive reals throughout this library.

namespace gedecomp::special {

/// log Gamma(x) for x > 0. Reentrant.
double log_gamma(double x);

/// psi(x) = d/dx log Gamma(x) for x > 0.
double digamma(double x);

/// log B(a, b).
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b) together with its complement.
struct BetaTail {
  double lower;  ///< I_x(a, b)
  double upper;  ///< 1 - I_x(a, b), computed without cancellation
};

/// `y` must equal 1 - x; passing it separately keeps precision when x is
/// close to 1. Continued fraction (modified Lentz) on the side where it
/// converges quickly, power series when the fraction stalls.
BetaTail incomplete_beta(double a, double b, double x, double y);

inline double incomplete_beta(double a, double b, double x) {
  return incomplete_beta(a, b, x, 1.0 - x).lower;
}

double normal_cdf(double z);

/// 1 - normal_cdf(z) without cancellation.
double normal_sf(double z);

}  // namespace gedecomp::special
