#pragma once

// Scalar special functions used by the asymptotic test path and the F-test.
// All of them are pure and allocation-free.

namespace witnesslab {

// Standard normal CDF. Relative error well below 1e-10 over the useful range.
double normal_cdf(double x);

// Standard normal quantile, requires 0 < p < 1. Rational initial guess
// refined by Newton steps against normal_cdf.
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b), a,b > 0, 0 <= x <= 1.
double regularized_incomplete_beta(double a, double b, double x);

// CDF of the F distribution with (d1, d2) degrees of freedom at f >= 0.
double f_distribution_cdf(double f, double d1, double d2);

}  // namespace witnesslab
