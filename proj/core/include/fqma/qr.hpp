#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fqma/fpca.hpp"

namespace fqma {

// check function rho_tau(e) = [tau - 1{e <= 0}] e
inline double check_loss(double e, double tau) {
  return e > 0.0 ? tau * e : (tau - 1.0) * e;
}

inline double psi_tau(double e, double tau) { return e <= 0.0 ? tau - 1.0 : tau; }

// One candidate model: quantile regression of the responses on the first j
// score columns plus an intercept.  Optima need not be unique; downstream
// contracts are on the loss value and on predictions, never on coefficient
// identity.
struct QuantileFit {
  double tau = 0.5;
  int j = 0;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;   // j entries
  Eigen::VectorXd slope_on_grid;  // sum_j coefficients[j] * phi_j on the grid
  double in_sample_loss = 0.0;    // (1/n) sum of check losses
  bool rank_deficient = false;
  bool perfect_fit = false;       // loss at (numerical) zero
};

// Exact LP fit; scores is n x j (j = 0 gives the intercept-only model).
// slope_on_grid is left empty here; fit_candidate fills it from the basis.
QuantileFit fit_qr(const Eigen::VectorXd& responses, const Eigen::MatrixXd& scores,
                   double tau);

// Fits the candidate at truncation level j from a fitted FPCA model and
// attaches the slope function.
QuantileFit fit_candidate(const FpcaModel& model, const Eigen::VectorXd& responses,
                          double tau, int j);

double predict(const QuantileFit& fit, const Eigen::VectorXd& scores_new);

// Sentinel returned by aic/bic on a perfect fit (log of zero loss).
inline constexpr double kScoreSentinel = -1e300;

double aic(const QuantileFit& fit, int n);
double bic(const QuantileFit& fit, int n);

struct Criterion {
  enum class Kind { FVE, AIC, BIC } kind = Kind::FVE;
  double gamma = 0.90;  // FVE threshold

  static Criterion fve(double g) { return {Kind::FVE, g}; }
  static Criterion aic() { return {Kind::AIC, 0.0}; }
  static Criterion bic() { return {Kind::BIC, 0.0}; }
};

struct Selection {
  int j = 0;
  bool fve_unreachable = false;  // threshold not reached inside j_range
};

// FVE: smallest j in j_range with cumulative FVE >= gamma (falls back to the
// largest j with a warning flag when unreachable).  AIC/BIC: argmin over
// j_range, smallest j on ties.
Selection select_j(const FpcaModel& model, const Eigen::VectorXd& responses, double tau,
                   const Criterion& criterion, const std::vector<int>& j_range);

std::string criterion_name(const Criterion& c);

}  // namespace fqma
