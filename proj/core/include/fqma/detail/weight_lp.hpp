#pragma once

#include <Eigen/Dense>

namespace fqma::detail {

// Simplex-constrained check-loss minimizer:
//   min_{w,u,v} tau*1'u + (1-tau)*1'v
//   s.t. P w + u - v = y, 1'w = 1, w,u,v >= 0.
// Mehrotra predictor-corrector on the primal; the normal equations collapse
// to an m x m system via the diagonal-plus-low-rank structure, so cost per
// iteration is O(n m^2).  Contracts downstream are on the criterion value,
// so no crossover to a vertex is performed.
Eigen::VectorXd weight_lp(const Eigen::MatrixXd& P, const Eigen::VectorXd& y, double tau);

}  // namespace fqma::detail
