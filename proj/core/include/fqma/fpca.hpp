#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fqma/smoothing.hpp"
#include "fqma/types.hpp"

namespace fqma {

struct Bandwidths {
  Bandwidth mean;  // nullopt = AUTO (CV over log-spaced candidates)
  Bandwidth covariance;
};

// Common-grid FPCA representation of a sample of sparse curves.
//
// Invariants kept by construction: eigenvalues are positive non-increasing,
// eigenfunctions are orthonormal under the discrete inner product
// spacing * sum_g phi_j(t_g) phi_k(t_g), and fve_cumulative is nondecreasing
// with last element exactly 1.
struct FpcaModel {
  Grid grid{2};
  Eigen::VectorXd mean;            // G
  Eigen::MatrixXd covariance;      // G x G, symmetric
  double noise_variance = 0.0;     // sigma_u^2 >= 0
  Eigen::VectorXd eigenvalues;     // J, non-increasing, > 0
  Eigen::MatrixXd eigenfunctions;  // G x J, column j orthonormal on the grid
  Eigen::MatrixXd scores;          // n x J, training-subject score estimates
  Eigen::VectorXd fve_cumulative;  // J

  int retained() const { return static_cast<int>(eigenvalues.size()); }

  double bandwidth_mean = 0.0;  // bandwidths actually used for the fit
  double bandwidth_covariance = 0.0;
};

Eigen::VectorXd smooth_mean(const std::vector<SparseCurve>& curves, const Grid& grid,
                            Bandwidth bandwidth, double* bandwidth_used = nullptr);

// Returns the smoothed covariance surface and the measurement-noise variance
// estimate.  Raw covariances with l = l' are excluded from the surface fit;
// the noise variance comes from the smoothed raw diagonal minus the fitted
// surface diagonal, averaged over the central half of the domain and clipped
// at zero.
std::pair<Eigen::MatrixXd, double> smooth_covariance(const std::vector<SparseCurve>& curves,
                                                     const Eigen::VectorXd& mean,
                                                     const Grid& grid, Bandwidth bandwidth,
                                                     double* bandwidth_used = nullptr);

// Eigendecomposition of covariance*spacing; eigenfunctions rescaled by
// spacing^{-1/2}.  Retains at most j_max pairs, discards nonpositive
// eigenvalues and those below 1e-10 * largest.  Sign convention: the entry
// of largest absolute value in each eigenfunction is positive.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose(const Eigen::MatrixXd& covariance,
                                                           const Grid& grid, int j_max);

// Conditional-expectation score estimate for one curve: evaluates model
// functions at the observation times by linear interpolation, then solves
// {G(T_l,T_l') + sigma_u^2 I} x = U - mu and returns
// xi_j = kappa_j * phi_j(T)' x for j = 1..n_scores.
Eigen::VectorXd pace_scores(const SparseCurve& curve, const FpcaModel& model, int n_scores);

FpcaModel fit_fpca(const std::vector<SparseCurve>& curves, const Grid& grid, int j_max,
                   const Bandwidths& bandwidths);

}  // namespace fqma
