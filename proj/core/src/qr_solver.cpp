#include "fqma/detail/qr_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fqma/errors.hpp"

namespace fqma::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double check_loss_sum(const VectorXd& resid, double tau) {
  double acc = 0.0;
  for (int i = 0; i < resid.size(); ++i)
    acc += resid[i] > 0.0 ? tau * resid[i] : (tau - 1.0) * resid[i];
  return acc;
}

// ---- interior point on the bounded dual --------------------------------
//
//   max y'a  s.t.  X'a = (1-tau) X'1,  0 <= a <= 1
//
// The equality multipliers converge to -beta.  Mehrotra predictor-corrector;
// each step solves an r x r system X' diag(q) X.
VectorXd qr_interior_point(const MatrixXd& X, const VectorXd& y, double tau) {
  const int n = static_cast<int>(X.rows());
  const int r = static_cast<int>(X.cols());

  VectorXd c = -y;
  VectorXd b = (1.0 - tau) * (X.transpose() * VectorXd::Ones(n));
  VectorXd x = VectorXd::Constant(n, 1.0 - tau);
  VectorXd s = VectorXd::Constant(n, tau);

  VectorXd nu = X.householderQr().solve(c);
  VectorXd rr = c - X * nu;
  const double shift = 1e-2 * (1.0 + c.cwiseAbs().maxCoeff());
  VectorXd z = rr.cwiseMax(0.0).array() + shift;
  VectorXd w = z - rr;

  const double gap_tol = 1e-11;
  for (int iter = 0; iter < 100; ++iter) {
    double gap = c.dot(x) - b.dot(nu) + w.sum();
    if (gap < gap_tol * (1.0 + std::abs(c.dot(x)))) break;

    VectorXd q = (z.cwiseQuotient(x) + w.cwiseQuotient(s)).cwiseInverse();
    VectorXd r_d = c - X * nu - z + w;
    VectorXd r_p = b - X.transpose() * x;

    MatrixXd M = X.transpose() * q.asDiagonal() * X;
    Eigen::LDLT<MatrixXd> fact(M);
    if (fact.info() != Eigen::Success) {
      M.diagonal().array() += 1e-12 * (1.0 + M.trace() / r);
      fact.compute(M);
      if (fact.info() != Eigen::Success) throw LpFailure("QR IPM normal equations failed");
    }

    auto direction = [&](const VectorXd& rxz, const VectorXd& rsw, VectorXd& dx,
                         VectorXd& ds, VectorXd& dz, VectorXd& dw, VectorXd& dnu) {
      VectorXd rho = rxz.cwiseQuotient(x) - rsw.cwiseQuotient(s) - r_d;
      dnu = fact.solve(r_p - X.transpose() * (q.cwiseProduct(rho)));
      dx = q.cwiseProduct(X * dnu + rho);
      ds = -dx;
      dz = (rxz - z.cwiseProduct(dx)).cwiseQuotient(x);
      dw = (rsw - w.cwiseProduct(ds)).cwiseQuotient(s);
    };
    auto max_step = [](const VectorXd& v, const VectorXd& dv) {
      double a = 1.0;
      for (int i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
      return a;
    };

    VectorXd dx, ds, dz, dw, dnu;
    VectorXd rxz = -x.cwiseProduct(z), rsw = -s.cwiseProduct(w);
    direction(rxz, rsw, dx, ds, dz, dw, dnu);
    double ap = std::min(1.0, 0.9995 * std::min(max_step(x, dx), max_step(s, ds)));
    double ad = std::min(1.0, 0.9995 * std::min(max_step(z, dz), max_step(w, dw)));

    double mu = (x.dot(z) + s.dot(w)) / (2.0 * n);
    double mu_aff = ((x + ap * dx).dot(z + ad * dz) + (s + ap * ds).dot(w + ad * dw)) /
                    (2.0 * n);
    double sigma = mu > 0.0 ? std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0) : 0.0;

    rxz = (sigma * mu - dx.cwiseProduct(dz).array()).matrix() - x.cwiseProduct(z);
    rsw = (sigma * mu - ds.cwiseProduct(dw).array()).matrix() - s.cwiseProduct(w);
    direction(rxz, rsw, dx, ds, dz, dw, dnu);
    ap = std::min(1.0, 0.9995 * std::min(max_step(x, dx), max_step(s, ds)));
    ad = std::min(1.0, 0.9995 * std::min(max_step(z, dz), max_step(w, dw)));

    x += ap * dx;
    s += ap * ds;
    nu += ad * dnu;
    z += ad * dz;
    w += ad * dw;
  }
  return -nu;
}

// ---- vertex polish ------------------------------------------------------

struct PolishState {
  std::vector<int> basis;             // r interpolated rows
  Eigen::PartialPivLU<MatrixXd> lu;   // of X_B
  VectorXd beta;
  VectorXd resid;
};

void refresh(PolishState& st, const MatrixXd& X, const VectorXd& y) {
  const int r = static_cast<int>(X.cols());
  MatrixXd xb(r, r);
  VectorXd yb(r);
  for (int k = 0; k < r; ++k) {
    xb.row(k) = X.row(st.basis[k]);
    yb[k] = y[st.basis[k]];
  }
  st.lu.compute(xb);
  st.beta = st.lu.solve(yb);
  st.resid = y - X * st.beta;
  for (int k = 0; k < r; ++k) st.resid[st.basis[k]] = 0.0;
}

// Rows ordered by preference; greedily keep those extending the row span.
std::vector<int> select_basis_rows(const MatrixXd& X, const std::vector<int>& order) {
  const int r = static_cast<int>(X.cols());
  std::vector<int> basis;
  MatrixXd q(r, r);
  int k = 0;
  for (double tol : {1e-7, 1e-10, 1e-13}) {
    basis.clear();
    k = 0;
    for (int idx : order) {
      VectorXd v = X.row(idx).transpose();
      double scale = v.norm();
      if (!(scale > 0.0)) continue;
      for (int j = 0; j < k; ++j) v -= q.col(j).dot(v) * q.col(j);
      if (v.norm() > tol * scale) {
        q.col(k) = v / v.norm();
        basis.push_back(idx);
        if (++k == r) return basis;
      }
    }
  }
  throw LpFailure("could not assemble a nonsingular QR basis");
}

double polish_to_vertex(const MatrixXd& X, const VectorXd& y, double tau, VectorXd& beta) {
  const int n = static_cast<int>(X.rows());
  const int r = static_cast<int>(X.cols());
  const double ztol = 1e-11 * (1.0 + y.cwiseAbs().maxCoeff());
  const double box_tol = 1e-9;

  VectorXd resid0 = y - X * beta;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(resid0[a]) < std::abs(resid0[b]); });

  PolishState st;
  st.basis = select_basis_rows(X, order);
  refresh(st, X, y);

  const long max_iter = 60L * n + 200;
  int stalled = 0;  // consecutive zero-step exchanges
  std::vector<char> in_basis(n, 0);

  for (long iter = 0; iter < max_iter; ++iter) {
    std::fill(in_basis.begin(), in_basis.end(), 0);
    for (int idx : st.basis) in_basis[idx] = 1;

    // dual values on the basis from strictly signed residuals
    VectorXd h = VectorXd::Zero(r);
    for (int i = 0; i < n; ++i) {
      if (in_basis[i] || std::abs(st.resid[i]) <= ztol) continue;
      h += (st.resid[i] > 0.0 ? tau : tau - 1.0) * X.row(i).transpose();
    }
    VectorXd lambda = st.lu.transpose().solve(-h);

    int k = -1;
    double worst = box_tol;
    const bool bland = stalled > 8 * r;
    for (int kk = 0; kk < r; ++kk) {
      double viol = std::max(lambda[kk] - tau, (tau - 1.0) - lambda[kk]);
      if (bland) {
        if (viol > box_tol) {
          k = kk;
          break;
        }
      } else if (viol > worst) {
        worst = viol;
        k = kk;
      }
    }
    if (k < 0) break;  // lambda in box: subgradient certificate holds

    double sigma = lambda[k] > tau ? -1.0 : 1.0;
    VectorXd ek = VectorXd::Zero(r);
    ek[k] = 1.0;
    VectorXd d = sigma * st.lu.solve(ek);
    VectorXd xd = X * d;
    const double dtol = 1e-12 * (1.0 + xd.cwiseAbs().maxCoeff());

    double slope = (sigma > 0.0 ? 1.0 - tau : tau) + sigma * lambda[k];
    // kinks sitting at t = 0 resist movement in either direction
    int block = -1;
    double block_mag = dtol;
    for (int i = 0; i < n; ++i) {
      if (in_basis[i] || std::abs(st.resid[i]) > ztol) continue;
      double a = xd[i];
      if (std::abs(a) <= dtol) continue;
      slope += a > 0.0 ? a * (1.0 - tau) : -a * tau;
      bool better = bland ? (block < 0 || i < block) : std::abs(a) > block_mag;
      if (better) {
        block = i;
        block_mag = std::abs(a);
      }
    }

    if (slope >= -1e-12) {
      // blocked at the current vertex: degenerate exchange, loss unchanged
      if (block < 0) break;  // numerically at an optimum
      st.basis[k] = block;
      refresh(st, X, y);
      ++stalled;
      continue;
    }

    // piecewise-linear line search: derivative gains |xd_i| at each crossing
    std::vector<std::pair<double, int>> steps;
    steps.reserve(n);
    for (int i = 0; i < n; ++i) {
      if (in_basis[i] || std::abs(st.resid[i]) <= ztol) continue;
      if (std::abs(xd[i]) <= dtol) continue;
      double t = st.resid[i] / xd[i];
      if (t > 0.0) steps.emplace_back(t, i);
    }
    std::sort(steps.begin(), steps.end());
    int enter = -1;
    for (const auto& [t, i] : steps) {
      slope += std::abs(xd[i]);
      if (slope >= -1e-12) {
        enter = i;
        break;
      }
    }
    if (enter < 0) throw LpFailure("QR line search found no blocking residual");

    st.basis[k] = enter;
    refresh(st, X, y);
    stalled = 0;
  }

  beta = st.beta;
  return check_loss_sum(st.resid, tau);
}

}  // namespace

QrLpSolution solve_qr_lp(const MatrixXd& X, const VectorXd& y, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("tau must lie in (0,1)");
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (y.size() != n) throw DimensionMismatch("responses/design size mismatch");
  if (!X.allFinite() || !y.allFinite()) throw InvalidInput("non-finite values in QR data");

  // collinear columns: solve on an independent subset, zero out the rest
  Eigen::ColPivHouseholderQR<MatrixXd> cp(X);
  cp.setThreshold(1e-10);
  const int r = std::min<int>(cp.rank(), n);
  const bool deficient = r < p;
  std::vector<int> cols(p);
  for (int i = 0; i < p; ++i) cols[i] = cp.colsPermutation().indices()[i];
  cols.resize(r);
  std::sort(cols.begin(), cols.end());

  MatrixXd Xr(n, r);
  for (int j = 0; j < r; ++j) Xr.col(j) = X.col(cols[j]);

  VectorXd beta_r;
  if (n > 64) {
    beta_r = qr_interior_point(Xr, y, tau);
  } else {
    beta_r = Xr.householderQr().solve(y);  // cold start from least squares
  }
  double loss = polish_to_vertex(Xr, y, tau, beta_r);

  QrLpSolution out;
  out.beta = VectorXd::Zero(p);
  for (int j = 0; j < r; ++j) out.beta[cols[j]] = beta_r[j];
  out.loss_sum = loss;
  out.rank_deficient = deficient;
  return out;
}

}  // namespace fqma::detail
