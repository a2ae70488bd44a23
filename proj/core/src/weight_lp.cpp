#include "fqma/detail/weight_lp.hpp"

#include <algorithm>
#include <cmath>

#include "fqma/errors.hpp"

namespace fqma::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double max_step(const VectorXd& v, const VectorXd& dv) {
  double a = 1.0;
  for (int i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

}  // namespace

VectorXd weight_lp(const MatrixXd& P_in, const VectorXd& y_in, double tau) {
  const int n = static_cast<int>(P_in.rows());
  const int m = static_cast<int>(P_in.cols());
  if (y_in.size() != n) throw DimensionMismatch("prediction/response size mismatch");
  if (m < 1) throw InvalidInput("no candidates");
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidInput("tau must lie in (0,1)");

  const double scale =
      std::max({1.0, y_in.cwiseAbs().maxCoeff(), P_in.cwiseAbs().maxCoeff()});
  const MatrixXd P = P_in / scale;
  const VectorXd y = y_in / scale;

  // primal blocks (w, u, v), duals (d, sig) with slacks (zw, zu, zv)
  VectorXd w = VectorXd::Constant(m, 1.0 / m);
  VectorXd r0 = y - P * w;
  const double s0 = 1.0 + 0.1 * r0.cwiseAbs().mean();
  VectorXd u = r0.cwiseMax(0.0).array() + s0;
  VectorXd v = (-r0).cwiseMax(0.0).array() + s0;
  VectorXd d = VectorXd::Zero(n);
  double sig = -1.0;
  VectorXd zw = VectorXd::Constant(m, 1.0);
  VectorXd zu = VectorXd::Constant(n, tau);
  VectorXd zv = VectorXd::Constant(n, 1.0 - tau);

  const double nvars = m + 2.0 * n;
  const int max_iter = 200;
  VectorXd best_w = w;
  double best_metric = 1e300;

  for (int iter = 0; iter < max_iter; ++iter) {
    VectorXd rp_top = y - (P * w + u - v);
    double rp_sum = 1.0 - w.sum();
    VectorXd rdw = -(P.transpose() * d).eval() - VectorXd::Constant(m, sig) - zw;
    VectorXd rdu = VectorXd::Constant(n, tau) - d - zu;
    VectorXd rdv = VectorXd::Constant(n, 1.0 - tau) + d - zv;

    double cx = tau * u.sum() + (1.0 - tau) * v.sum();
    double by = y.dot(d) + sig;
    double gap = std::abs(cx - by) / (1.0 + std::abs(cx));
    double pinf = std::max(rp_top.cwiseAbs().maxCoeff(), std::abs(rp_sum));
    double dinf = std::max({rdw.cwiseAbs().maxCoeff(), rdu.cwiseAbs().maxCoeff(),
                            rdv.cwiseAbs().maxCoeff()});
    double metric = std::max({gap, pinf, dinf});
    if (metric < best_metric) {
      best_metric = metric;
      best_w = w;
    }
    if (gap < 1e-9 && pinf < 1e-9 && dinf < 1e-9) return w;

    VectorXd dw_diag = (w.cwiseQuotient(zw)).cwiseMax(1e-14).cwiseMin(1e14);
    VectorXd du_diag = (u.cwiseQuotient(zu)).cwiseMax(1e-14).cwiseMin(1e14);
    VectorXd dv_diag = (v.cwiseQuotient(zv)).cwiseMax(1e-14).cwiseMin(1e14);
    VectorXd lam_inv = (du_diag + dv_diag).cwiseInverse();

    // Normal equations have the shape [Lam + P Dw P', P Dw 1; (P Dw 1)', 1'Dw 1].
    // Substituting g = Dw (P' dd + 1 dsig) turns them into the small saddle
    // system below; this dodges the catastrophic cancellation a Schur
    // complement in the large block suffers once Dw blows up near optimality.
    MatrixXd saddle = MatrixXd::Zero(m + 1, m + 1);
    saddle.topLeftCorner(m, m) = P.transpose() * lam_inv.asDiagonal() * P;
    saddle.topLeftCorner(m, m).diagonal() += dw_diag.cwiseInverse();
    saddle.topRightCorner(m, 1).setConstant(-1.0);
    saddle.bottomLeftCorner(1, m).setOnes();
    // equilibrate rows: the D_w^{-1} diagonal spans many orders of magnitude
    VectorXd row_scale(m + 1);
    for (int i = 0; i <= m; ++i)
      row_scale[i] = 1.0 / std::max(1e-300, saddle.row(i).cwiseAbs().maxCoeff());
    MatrixXd scaled = row_scale.asDiagonal() * saddle;
    Eigen::FullPivLU<MatrixXd> saddle_lu(scaled);

    VectorXd dwv, duv, dvv, dzw, dzu, dzv_, ddv;
    double dsig = 0.0;
    auto newton = [&](const VectorXd& rcw, const VectorXd& rcu, const VectorXd& rcv) {
      VectorXd fw = rcw.cwiseQuotient(w) - rdw;
      VectorXd fu = rcu.cwiseQuotient(u) - rdu;
      VectorXd fv = rcv.cwiseQuotient(v) - rdv;
      VectorXd r1 = rp_top - (P * dw_diag.cwiseProduct(fw) + du_diag.cwiseProduct(fu) -
                              dv_diag.cwiseProduct(fv));
      double r2 = rp_sum - dw_diag.cwiseProduct(fw).sum();
      VectorXd rhs(m + 1);
      rhs.head(m) = P.transpose() * lam_inv.cwiseProduct(r1);
      rhs[m] = r2;
      VectorXd sol = saddle_lu.solve(row_scale.cwiseProduct(rhs));
      VectorXd g = sol.head(m);
      dsig = sol[m];
      ddv = lam_inv.cwiseProduct(r1 - P * g);
      dwv = g + dw_diag.cwiseProduct(fw);
      duv = du_diag.cwiseProduct(ddv + fu);
      dvv = dv_diag.cwiseProduct(-ddv + fv);
      // dual slacks from the dual-feasibility rows; dividing the
      // complementarity residual by a vanishing primal would amplify solver
      // noise into dual infeasibility
      dzw = rdw - (P.transpose() * ddv + VectorXd::Constant(m, dsig));
      dzu = rdu - ddv;
      dzv_ = rdv + ddv;
    };

    // affine predictor
    newton(-w.cwiseProduct(zw), -u.cwiseProduct(zu), -v.cwiseProduct(zv));
    double ap = std::min({max_step(w, dwv), max_step(u, duv), max_step(v, dvv)});
    double ad = std::min({max_step(zw, dzw), max_step(zu, dzu), max_step(zv, dzv_)});
    ap = std::min(1.0, 0.9995 * ap);
    ad = std::min(1.0, 0.9995 * ad);

    double mu = (w.dot(zw) + u.dot(zu) + v.dot(zv)) / nvars;
    double mu_aff = ((w + ap * dwv).dot(zw + ad * dzw) + (u + ap * duv).dot(zu + ad * dzu) +
                     (v + ap * dvv).dot(zv + ad * dzv_)) /
                    nvars;
    double sc = mu > 0.0 ? std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0) : 0.0;

    VectorXd rcw = (sc * mu - dwv.cwiseProduct(dzw).array()).matrix() - w.cwiseProduct(zw);
    VectorXd rcu = (sc * mu - duv.cwiseProduct(dzu).array()).matrix() - u.cwiseProduct(zu);
    VectorXd rcv = (sc * mu - dvv.cwiseProduct(dzv_).array()).matrix() - v.cwiseProduct(zv);
    newton(rcw, rcu, rcv);
    ap = std::min(1.0, 0.9995 * std::min({max_step(w, dwv), max_step(u, duv), max_step(v, dvv)}));
    ad = std::min(1.0,
                  0.9995 * std::min({max_step(zw, dzw), max_step(zu, dzu), max_step(zv, dzv_)}));

    w += ap * dwv;
    u += ap * duv;
    v += ap * dvv;
    d += ad * ddv;
    sig += ad * dsig;
    zw += ad * dzw;
    zu += ad * dzu;
    zv += ad * dzv_;
  }
  if (best_metric < 1e-8) return best_w;  // numeric floor, still far inside tolerance
  throw LpFailure("weight LP did not converge");
}

}  // namespace fqma::detail
