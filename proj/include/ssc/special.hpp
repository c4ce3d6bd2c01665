#pragma once

// In-house special functions for the statistical harness. Kept free of
// library oracles on purpose: the tests compare against these.

namespace ssc::special {

double log_gamma(double x);              // Lanczos, x > 0
double gamma_p(double a, double x);      // regularized lower incomplete gamma
double gamma_q(double a, double x);      // regularized upper incomplete gamma
double erf(double x);
double erfc(double x);
double normal_cdf(double x);
double normal_quantile(double p);
double chi2_cdf(double x, double dof);
double chi2_sf(double x, double dof);
double chi2_quantile(double p, double dof);
double gamma_cdf(double x, double shape, double scale = 1.0);
double poisson_cdf(unsigned long long k, double mean);  // P(X <= k)
double kolmogorov_sf(double lambda);     // P(sup |B| > lambda) for the Brownian bridge
double ks_critical_coefficient(double alpha);

}  // namespace ssc::special
