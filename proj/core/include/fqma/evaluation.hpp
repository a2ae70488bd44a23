#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fqma/qr.hpp"

namespace fqma {

// Mean check loss of quantile forecasts over a test set.  Aggregation over
// random partitions is the caller's mean of per-partition values.
double fpe(const Eigen::VectorXd& y_test, const Eigen::VectorXd& q_hat, double tau);

// Excess prediction error against the infeasible true conditional quantile:
// mean of rho_tau(y - q_hat) - rho_tau(y - q_true).  Nonnegative in
// population; a Monte Carlo estimate may dip slightly below zero.
double efpe(const Eigen::VectorXd& y_test, const Eigen::VectorXd& q_hat,
            const Eigen::VectorXd& q_true, double tau);

// Mean integrated squared error of slope estimates over replications,
// trapezoid weights at the grid endpoints.
double mise(const std::vector<Eigen::VectorXd>& slope_estimates,
            const Eigen::VectorXd& slope_true, double spacing);

// Violation record of a quantile forecast path: hit_t = 1{y_t <= q_t}.
struct ViolationSeries {
  double tau = 0.05;
  std::vector<std::uint8_t> hits;

  int n_violations() const;
  // Hit_t = tau - hit_t, each entry in {tau, tau-1}
  std::vector<double> hit_stats() const;
};

ViolationSeries make_violation_series(const Eigen::VectorXd& y, const Eigen::VectorXd& q_hat,
                                      double tau);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool rejected = false;   // p_value < 0.05
  bool degenerate = false; // count pattern made the test undefined; p set to 1
};

// Four calibration tests at the 5% significance level:
//  HIT  exact two-sided binomial test of the violation count,
//  POF  proportion-of-failures likelihood ratio vs chi^2(1),
//  CCI  first-order Markov independence likelihood ratio vs chi^2(1),
//  TBF  time-between-failures mixed likelihood ratio vs chi^2(x+1).
struct BacktestReport {
  TestResult hit, pof, cci, tbf;
  double tau = 0.0;
  int n_obs = 0;
  int n_violations = 0;
};

BacktestReport backtest(const ViolationSeries& series);

// Exposed for direct checks of the LR formulas.
double pof_statistic(int t, int x, double tau);
double tbf_gap_statistic(int gap, double tau);

}  // namespace fqma
