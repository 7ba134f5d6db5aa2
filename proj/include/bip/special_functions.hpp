#pragma once

// Scalar special functions backing the capacity analysis: regularized
// incomplete beta (linear and log domain), normal upper tail, regularized
// incomplete gamma, and chi-squared quantiles.

#include <cstdint>

namespace bip::sf {

double log_beta(double a, double b);

// I_x(a,b), relative error ~1e-14 over a,b in (0, ~1e3], x in [0,1].
double reg_inc_beta(double x, double a, double b);

// ln I_x(a,b); stays accurate when I_x underflows the double range.
double log_reg_inc_beta(double x, double a, double b);

// Upper tail of the standard normal, Q(x) = P(Z >= x).
double q_function(double x);

// Regularized lower/upper incomplete gamma P(a,x), Q(a,x).
double reg_lower_gamma(double a, double x);
double reg_upper_gamma(double a, double x);

// Quantile of the chi-squared distribution with nu > 0 degrees of freedom:
// the x with P(nu/2, x/2) = q. Newton iteration with bisection fallback.
double chi2_quantile(double nu, double q);

// ln of the Poisson pmf e^-lambda lambda^c / c!.
double log_poisson_pmf(double lambda, std::uint64_t c);

}  // namespace bip::sf
