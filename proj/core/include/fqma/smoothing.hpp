#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fqma/types.hpp"

namespace fqma {

// AUTO bandwidth = leave-curves-out cross-validation over a log-spaced
// candidate set; see bandwidth_candidates().
using Bandwidth = std::optional<double>;

struct Obs1D {
  double t;
  double y;
  int curve;  // index of the owning curve, used by CV folds
};

struct CovPair {
  double s;
  double t;
  double c;   // raw covariance value
  int curve;
};

// Candidate bandwidths for cross-validation: n_candidates log-spaced values
// in [2*spacing, 0.5].
std::vector<double> bandwidth_candidates(double spacing, int n_candidates = 10);

// Local linear fit at a single point.  The bandwidth is escalated (x1.5 per
// step) when the normal equations are singular in the given window; throws
// DegenerateDesign if they stay singular at the escalation cap.
double local_linear_at(const std::vector<Obs1D>& sorted_obs, double t0, double h);

// Local linear curve estimate on a set of evaluation points.
Eigen::VectorXd local_linear_curve(const std::vector<Obs1D>& sorted_obs,
                                   const std::vector<double>& eval_points, double h);

// Local linear surface estimate on eval_s x eval_t (pairs sorted by s).
Eigen::MatrixXd local_linear_surface(const std::vector<CovPair>& sorted_pairs,
                                     const std::vector<double>& eval_s,
                                     const std::vector<double>& eval_t, double h);

// Surface values on the diagonal via a rotated local-quadratic fit (linear
// along the diagonal, quadratic across it); used by the noise-variance
// estimate, where the plain surface fit is biased low by the ridge at s = t.
Eigen::VectorXd local_quadratic_diagonal(const std::vector<CovPair>& sorted_pairs,
                                         const std::vector<double>& eval_points, double h);

// 5-fold by-curve CV score (sum of squared held-out prediction errors).
double cv_score_mean(const std::vector<Obs1D>& sorted_obs, const Grid& grid, double h,
                     int n_folds, int n_curves);
double cv_score_covariance(const std::vector<CovPair>& sorted_pairs, double h, int n_folds,
                           int n_curves);

double select_bandwidth_mean(const std::vector<Obs1D>& sorted_obs, const Grid& grid,
                             int n_curves);
double select_bandwidth_covariance(const std::vector<CovPair>& sorted_pairs,
                                   double spacing, int n_curves);

}  // namespace fqma
