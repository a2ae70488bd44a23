#include "fqma/qr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fqma/detail/qr_solver.hpp"

namespace fqma {

QuantileFit fit_qr(const Eigen::VectorXd& responses, const Eigen::MatrixXd& scores,
                   double tau) {
  const int n = static_cast<int>(responses.size());
  const int j = static_cast<int>(scores.cols());
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("tau must lie in (0,1)");
  if (scores.rows() != n) throw DimensionMismatch("responses/scores row mismatch");
  if (n <= j + 1) throw InvalidInput("need n > j + 1 observations");

  Eigen::MatrixXd design(n, j + 1);
  design.col(0).setOnes();
  if (j > 0) design.rightCols(j) = scores;

  auto sol = detail::solve_qr_lp(design, responses, tau);

  QuantileFit fit;
  fit.tau = tau;
  fit.j = j;
  fit.intercept = sol.beta[0];
  fit.coefficients = sol.beta.tail(j);
  fit.in_sample_loss = sol.loss_sum / n;
  fit.rank_deficient = sol.rank_deficient;
  double scale = 1.0 + responses.cwiseAbs().maxCoeff();
  fit.perfect_fit = fit.in_sample_loss <= 1e-13 * scale;
  return fit;
}

QuantileFit fit_candidate(const FpcaModel& model, const Eigen::VectorXd& responses,
                          double tau, int j) {
  if (j < 0 || j > model.retained())
    throw InvalidInput("truncation level outside retained eigenpairs");
  QuantileFit fit = fit_qr(responses, model.scores.leftCols(j), tau);
  fit.slope_on_grid = j > 0
                          ? Eigen::VectorXd(model.eigenfunctions.leftCols(j) * fit.coefficients)
                          : Eigen::VectorXd::Zero(model.grid.size());
  return fit;
}

double predict(const QuantileFit& fit, const Eigen::VectorXd& scores_new) {
  if (scores_new.size() != fit.j)
    throw DimensionMismatch("score vector length does not match fit truncation");
  return fit.intercept + fit.coefficients.dot(scores_new);
}

double aic(const QuantileFit& fit, int n) {
  if (fit.perfect_fit) return kScoreSentinel;
  return 2.0 * n * std::log(fit.in_sample_loss) + 2.0 * (fit.j + 1);
}

double bic(const QuantileFit& fit, int n) {
  if (fit.perfect_fit) return kScoreSentinel;
  return 2.0 * n * std::log(fit.in_sample_loss) + (fit.j + 1) * std::log(static_cast<double>(n));
}

Selection select_j(const FpcaModel& model, const Eigen::VectorXd& responses, double tau,
                   const Criterion& criterion, const std::vector<int>& j_range) {
  if (j_range.empty()) throw InvalidInput("empty truncation range");
  std::vector<int> range = j_range;
  std::sort(range.begin(), range.end());
  for (int j : range)
    if (j < 0 || j > model.retained())
      throw InvalidInput("truncation range outside retained eigenpairs");

  if (criterion.kind == Criterion::Kind::FVE) {
    for (int j : range) {
      double fve = j == 0 ? 0.0 : model.fve_cumulative[j - 1];
      if (fve >= criterion.gamma) return {j, false};
    }
    return {range.back(), true};
  }

  const int n = static_cast<int>(responses.size());
  double best = std::numeric_limits<double>::infinity();
  int best_j = range.front();
  for (int j : range) {
    QuantileFit fit = fit_qr(responses, model.scores.leftCols(j), tau);
    double score = criterion.kind == Criterion::Kind::AIC ? aic(fit, n) : bic(fit, n);
    if (score < best) {
      best = score;
      best_j = j;
    }
  }
  return {best_j, false};
}

std::string criterion_name(const Criterion& c) {
  switch (c.kind) {
    case Criterion::Kind::AIC:
      return "AIC";
    case Criterion::Kind::BIC:
      return "BIC";
    default: {
      int pct = static_cast<int>(std::lround(c.gamma * 100));
      return "FVE" + std::to_string(pct);
    }
  }
}

}  // namespace fqma
