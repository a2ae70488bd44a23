#include "fqma/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fqma/errors.hpp"

namespace fqma::stats {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("normal_quantile needs p in (0,1)");
  // Phi^{-1}(p) = -sqrt(2) * erfc^{-1}(2p)
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double chi_squared_sf(double x, double df) {
  if (df <= 0.0) throw InvalidInput("chi_squared_sf needs df > 0");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double log_binomial_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  double lp = 0.0;
  if (k > 0) lp += k * std::log(p);
  if (k < n) lp += (n - k) * std::log1p(-p);
  return lc + lp;
}

double binomial_test_two_sided(int n, int k, double p) {
  if (n <= 0 || k < 0 || k > n) throw InvalidInput("bad binomial test arguments");
  const double lfk = log_binomial_pmf(n, k, p);
  // slack absorbs roundoff when comparing equal-probability tails
  const double cutoff = lfk + 1e-7;
  double total = 0.0;
  for (int j = 0; j <= n; ++j) {
    double lj = log_binomial_pmf(n, j, p);
    if (lj <= cutoff) total += std::exp(lj);
  }
  return std::min(1.0, total);
}

}  // namespace fqma::stats
