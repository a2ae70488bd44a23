#pragma once

#include <Eigen/Dense>

namespace fqma::detail {

struct QrLpSolution {
  Eigen::VectorXd beta;  // one coefficient per column of X
  double loss_sum;       // sum of check losses at beta
  bool rank_deficient;
};

// Exact minimizer of sum_i rho_tau(y_i - x_i' beta).  Solves the LP
//   min tau*1'u + (1-tau)*1'v  s.t.  X beta + u - v = y, u,v >= 0
// by a bounded-dual interior-point pass followed by crossover to a vertex
// and simplex pivots until the subgradient optimality certificate holds.
// Collinear columns are detected and their coefficients fixed at zero.
QrLpSolution solve_qr_lp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tau);

}  // namespace fqma::detail
