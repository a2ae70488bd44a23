#pragma once

namespace fqma::stats {

// Standard normal quantile, accurate to well below 1e-9 across (0,1).
double normal_quantile(double p);

double normal_cdf(double x);

// Upper tail P(X > x) for X ~ chi-squared with df degrees of freedom.
double chi_squared_sf(double x, double df);

double log_binomial_pmf(int n, int k, double p);

// Two-sided exact binomial test of k successes out of n against rate p:
// sums P(X = j) over all j with pmf no larger than pmf(k) ("minlike").
double binomial_test_two_sided(int n, int k, double p);

}  // namespace fqma::stats
