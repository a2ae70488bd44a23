#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fqma/fpca.hpp"
#include "fqma/qr.hpp"
#include "fqma/rng.hpp"

namespace testutil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// closed form of int_0^v [1{u <= s} - 1{u <= 0}] ds
inline double knight_integral(double u, double v) {
  if (u > 0.0) return std::max(0.0, v - u);
  return std::max(0.0, u - v);
}

// Enumerates every interpolating fit of a tiny instance (j <= 1) and returns
// the minimal loss sum: single-point intercepts with zero slope, plus every
// two-point line with distinct score values.
inline double brute_force_qr_loss(const VectorXd& y, const MatrixXd& scores, double tau) {
  const int n = static_cast<int>(y.size());
  const int j = static_cast<int>(scores.cols());
  auto loss_at = [&](double a, double b) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double pred = a + (j == 1 ? b * scores(i, 0) : 0.0);
      acc += fqma::check_loss(y[i] - pred, tau);
    }
    return acc;
  };
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) best = std::min(best, loss_at(y[i], 0.0));
  if (j == 1) {
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) {
        double ds = scores(i, 0) - scores(k, 0);
        if (ds == 0.0) continue;
        double b = (y[i] - y[k]) / ds;
        double a = y[i] - b * scores(i, 0);
        best = std::min(best, loss_at(a, b));
      }
  }
  return best;
}

struct TinyInstance {
  VectorXd y;
  MatrixXd scores;
  double tau;
};

inline TinyInstance random_tiny_instance(fqma::Rng& rng) {
  TinyInstance inst;
  int j = rng.uniform() < 0.5 ? 0 : 1;
  int n = static_cast<int>(rng.uniform_int(j + 2, 6));
  inst.y.resize(n);
  inst.scores.resize(n, j);
  bool ties = rng.uniform() < 0.3;
  for (int i = 0; i < n; ++i) {
    double v = rng.uniform(-2.0, 2.0);
    inst.y[i] = ties ? std::round(v) : v;
    if (j == 1) {
      double s = rng.uniform(-1.0, 1.0);
      inst.scores(i, 0) = ties && rng.uniform() < 0.5 ? std::round(2.0 * s) / 2.0 : s;
    }
  }
  inst.tau = rng.uniform(0.03, 0.97);
  return inst;
}

// #{res < 0} <= n tau <= #{res <= 0}; residuals within tol of zero count as
// zero (interpolated rows are exact zeros by construction)
inline bool subgradient_counts_ok(const VectorXd& y, const MatrixXd& scores,
                                  const fqma::QuantileFit& fit) {
  const int n = static_cast<int>(y.size());
  const double tol = 1e-9 * (1.0 + y.cwiseAbs().maxCoeff());
  int neg = 0, nonpos = 0;
  for (int i = 0; i < n; ++i) {
    double pred = fit.intercept;
    for (int k = 0; k < fit.j; ++k) pred += fit.coefficients[k] * scores(i, k);
    double r = y[i] - pred;
    if (r < -tol) ++neg;
    if (r <= tol) ++nonpos;
  }
  return neg <= n * fit.tau + 1e-9 && n * fit.tau <= nonpos + 1e-9;
}

// Model whose eigenfunctions vanish at both endpoints: sine modes are exactly
// orthonormal under the rectangle inner product on the equispaced grid, so
// conditional-expectation scores collapse to quadrature in the dense
// noiseless limit.
inline fqma::FpcaModel make_sine_model(int g, const std::vector<double>& kappas,
                                       double noise_variance) {
  fqma::FpcaModel model;
  model.grid = fqma::Grid(g);
  model.mean = VectorXd::Zero(g);
  MatrixXd cov = MatrixXd::Zero(g, g);
  for (std::size_t k = 0; k < kappas.size(); ++k) {
    VectorXd s(g);
    for (int i = 0; i < g; ++i)
      s[i] = std::sqrt(2.0) * std::sin((k + 1) * M_PI * model.grid.points[i]);
    cov += kappas[k] * s * s.transpose();
  }
  model.covariance = cov;
  model.noise_variance = noise_variance;
  std::tie(model.eigenvalues, model.eigenfunctions) =
      fqma::eigendecompose(cov, model.grid, static_cast<int>(kappas.size()));
  const int jr = model.retained();
  model.fve_cumulative.resize(jr);
  double total = model.eigenvalues.sum(), run = 0.0;
  for (int i = 0; i < jr; ++i) {
    run += model.eigenvalues[i];
    model.fve_cumulative[i] = run / total;
  }
  if (jr > 0) model.fve_cumulative[jr - 1] = 1.0;
  model.scores.resize(0, jr);
  return model;
}

// trapezoid quadrature of (x - mean) against eigenfunction j
inline double quadrature_score(const fqma::FpcaModel& model, const VectorXd& x_on_grid,
                               int j) {
  const int g = model.grid.size();
  double acc = 0.0;
  for (int i = 0; i < g; ++i) {
    double w = (i == 0 || i == g - 1) ? 0.5 : 1.0;
    acc += w * (x_on_grid[i] - model.mean[i]) * model.eigenfunctions(i, j);
  }
  return acc * model.grid.spacing;
}

}  // namespace testutil
