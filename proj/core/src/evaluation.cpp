#include "fqma/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "fqma/stats.hpp"

namespace fqma {

double fpe(const Eigen::VectorXd& y_test, const Eigen::VectorXd& q_hat, double tau) {
  if (y_test.size() == 0) throw EmptyTestSet("empty test set");
  if (y_test.size() != q_hat.size()) throw DimensionMismatch("test/forecast size mismatch");
  double acc = 0.0;
  for (int i = 0; i < y_test.size(); ++i) acc += check_loss(y_test[i] - q_hat[i], tau);
  return acc / y_test.size();
}

double efpe(const Eigen::VectorXd& y_test, const Eigen::VectorXd& q_hat,
            const Eigen::VectorXd& q_true, double tau) {
  if (y_test.size() == 0) throw EmptyTestSet("empty test set");
  if (y_test.size() != q_hat.size() || y_test.size() != q_true.size())
    throw DimensionMismatch("test/forecast size mismatch");
  double acc = 0.0;
  for (int i = 0; i < y_test.size(); ++i)
    acc += check_loss(y_test[i] - q_hat[i], tau) - check_loss(y_test[i] - q_true[i], tau);
  return acc / y_test.size();
}

double mise(const std::vector<Eigen::VectorXd>& slope_estimates,
            const Eigen::VectorXd& slope_true, double spacing) {
  if (slope_estimates.empty()) throw InvalidInput("no slope replications");
  const auto g = slope_true.size();
  double acc = 0.0;
  for (const auto& est : slope_estimates) {
    if (est.size() != g) throw DimensionMismatch("slope grids differ");
    double ise = 0.0;
    for (int i = 0; i < g; ++i) {
      double d = est[i] - slope_true[i];
      double wgt = (i == 0 || i == g - 1) ? 0.5 : 1.0;
      ise += wgt * d * d;
    }
    acc += ise * spacing;
  }
  return acc / slope_estimates.size();
}

int ViolationSeries::n_violations() const {
  int x = 0;
  for (auto h : hits) x += h;
  return x;
}

std::vector<double> ViolationSeries::hit_stats() const {
  std::vector<double> out(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) out[i] = tau - hits[i];
  return out;
}

ViolationSeries make_violation_series(const Eigen::VectorXd& y, const Eigen::VectorXd& q_hat,
                                      double tau) {
  if (y.size() != q_hat.size()) throw DimensionMismatch("series size mismatch");
  ViolationSeries s;
  s.tau = tau;
  s.hits.resize(y.size());
  for (int i = 0; i < y.size(); ++i) s.hits[i] = y[i] <= q_hat[i] ? 1 : 0;
  return s;
}

namespace {

inline double xlogy(double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; }

TestResult from_chi2(double lr, double df) {
  TestResult r;
  r.statistic = std::max(0.0, lr);
  r.p_value = stats::chi_squared_sf(r.statistic, df);
  r.rejected = r.p_value < 0.05;
  return r;
}

}  // namespace

double pof_statistic(int t, int x, double tau) {
  // LR = -2 log[ (1-tau)^{t-x} tau^x / ((1-x/t)^{t-x} (x/t)^x) ]
  double rate = static_cast<double>(x) / t;
  double log_null = xlogy(t - x, 1.0 - tau) + xlogy(x, tau);
  double log_alt = xlogy(t - x, 1.0 - rate) + xlogy(x, rate);
  return std::max(0.0, -2.0 * (log_null - log_alt));
}

double tbf_gap_statistic(int gap, double tau) {
  // LR_ind(d) = -2 log[ tau (1-tau)^{d-1} / ((1/d)(1-1/d)^{d-1}) ]
  double d = gap;
  double log_null = std::log(tau) + xlogy(d - 1.0, 1.0 - tau);
  double log_alt = -std::log(d) + xlogy(d - 1.0, 1.0 - 1.0 / d);
  return std::max(0.0, -2.0 * (log_null - log_alt));
}

BacktestReport backtest(const ViolationSeries& series) {
  const int t = static_cast<int>(series.hits.size());
  if (t < 2) throw SeriesTooShort("backtest needs at least 2 observations");
  if (!(series.tau > 0.0 && series.tau < 1.0)) throw InvalidInput("tau must lie in (0,1)");
  const double tau = series.tau;
  const int x = series.n_violations();

  BacktestReport report;
  report.tau = tau;
  report.n_obs = t;
  report.n_violations = x;

  // HIT: exact two-sided binomial test of the violation count
  report.hit.statistic = x;
  report.hit.p_value = stats::binomial_test_two_sided(t, x, tau);
  report.hit.rejected = report.hit.p_value < 0.05;

  // POF
  report.pof = from_chi2(pof_statistic(t, x, tau), 1.0);

  // CCI: LR on 2-state Markov transition counts
  int n00 = 0, n01 = 0, n10 = 0, n11 = 0;
  for (int i = 1; i < t; ++i) {
    int prev = series.hits[i - 1], cur = series.hits[i];
    if (prev == 0 && cur == 0) ++n00;
    if (prev == 0 && cur == 1) ++n01;
    if (prev == 1 && cur == 0) ++n10;
    if (prev == 1 && cur == 1) ++n11;
  }
  if (x == 0 || n10 + n11 == 0) {
    report.cci.degenerate = true;
    report.cci.p_value = 1.0;
    report.cci.statistic = 0.0;
    report.cci.rejected = false;
  } else {
    double p01 = static_cast<double>(n01) / (n00 + n01);
    double p11 = static_cast<double>(n11) / (n10 + n11);
    double p = static_cast<double>(n01 + n11) / (n00 + n01 + n10 + n11);
    double log_null = xlogy(n00 + n10, 1.0 - p) + xlogy(n01 + n11, p);
    double log_alt =
        xlogy(n00, 1.0 - p01) + xlogy(n01, p01) + xlogy(n10, 1.0 - p11) + xlogy(n11, p11);
    report.cci = from_chi2(-2.0 * (log_null - log_alt), 1.0);
  }

  // TBF: POF plus one gap term per violation (the first gap runs from the
  // series start), df = x + 1
  if (x == 0) {
    report.tbf.degenerate = true;
    report.tbf.p_value = 1.0;
    report.tbf.statistic = 0.0;
    report.tbf.rejected = false;
  } else {
    double lr = pof_statistic(t, x, tau);
    int last = -1;
    for (int i = 0; i < t; ++i) {
      if (!series.hits[i]) continue;
      lr += tbf_gap_statistic(i - last, tau);
      last = i;
    }
    report.tbf = from_chi2(lr, x + 1.0);
  }
  return report;
}

}  // namespace fqma
