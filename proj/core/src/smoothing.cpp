#include "fqma/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fqma {

namespace {

constexpr double kEscalation = 1.5;
constexpr double kMaxBandwidth = 2.0;  // window then covers the whole domain

inline double epanechnikov(double u) {
  double a = std::abs(u);
  return a < 1.0 ? 0.75 * (1.0 - a * a) : 0.0;
}

struct Window {
  std::size_t lo, hi;  // half-open index range
};

template <typename T>
Window window_by_s(const std::vector<T>& sorted, double center, double h,
                   double T::*coord) {
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), center - h,
                             [&](const T& o, double v) { return o.*coord < v; });
  auto hi = std::upper_bound(sorted.begin(), sorted.end(), center + h,
                             [&](double v, const T& o) { return v < o.*coord; });
  return {static_cast<std::size_t>(lo - sorted.begin()),
          static_cast<std::size_t>(hi - sorted.begin())};
}

// Weighted moments for the 1D local linear fit; returns false when the
// normal equations are singular at this bandwidth.
bool fit_1d(const std::vector<Obs1D>& obs, double t0, double h, double* out,
            int skip_fold = -1, const std::vector<int>* fold_of = nullptr) {
  Window w = window_by_s(obs, t0, h, &Obs1D::t);
  double s0 = 0, s1 = 0, s2 = 0, t0m = 0, t1m = 0;
  for (std::size_t i = w.lo; i < w.hi; ++i) {
    if (fold_of && (*fold_of)[obs[i].curve] == skip_fold) continue;
    double d = obs[i].t - t0;
    double k = epanechnikov(d / h);
    if (k <= 0.0) continue;
    s0 += k;
    s1 += k * d;
    s2 += k * d * d;
    t0m += k * obs[i].y;
    t1m += k * d * obs[i].y;
  }
  double det = s0 * s2 - s1 * s1;
  if (!(s0 > 0.0) || det <= 1e-12 * (s0 * s2 + 1e-300)) return false;
  *out = (s2 * t0m - s1 * t1m) / det;
  return true;
}

// Local quadratic in rotated coordinates at a diagonal point t0: regressors
// are the along-diagonal offset (s+t)/2 - t0 and the squared cross-diagonal
// offset (s-t)^2.  The quadratic term absorbs the ridge curvature of the
// surface at s = t, which a plain local-linear fit smears downward.
bool fit_diag_quadratic(const std::vector<CovPair>& pairs, std::size_t lo, std::size_t hi,
                        double t0, double h, double* out) {
  double m00 = 0, m10 = 0, m01 = 0, m20 = 0, m11 = 0, m02 = 0;
  double r0 = 0, r1 = 0, r2 = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const CovPair& p = pairs[i];
    double dt = p.t - t0;
    if (std::abs(dt) >= h) continue;
    double ds = p.s - t0;
    double k = epanechnikov(ds / h) * epanechnikov(dt / h);
    if (k <= 0.0) continue;
    double par = 0.5 * (ds + dt);
    double perp2 = (p.s - p.t) * (p.s - p.t);
    m00 += k;
    m10 += k * par;
    m01 += k * perp2;
    m20 += k * par * par;
    m11 += k * par * perp2;
    m02 += k * perp2 * perp2;
    r0 += k * p.c;
    r1 += k * par * p.c;
    r2 += k * perp2 * p.c;
  }
  if (!(m00 > 0.0)) return false;
  Eigen::Matrix3d m;
  m << m00, m10, m01, m10, m20, m11, m01, m11, m02;
  Eigen::Vector3d r(r0, r1, r2);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
  lu.setThreshold(1e-9);
  if (lu.rank() < 3) return false;
  *out = lu.solve(r)(0);
  return true;
}

bool fit_2d(const std::vector<CovPair>& pairs, std::size_t lo, std::size_t hi, double s0,
            double t0, double h, double* out, int skip_fold = -1,
            const std::vector<int>* fold_of = nullptr) {
  // moments M_ab = sum K * ds^a * dt^b, right side R_ab = sum K * c * ds^a dt^b
  double m00 = 0, m10 = 0, m01 = 0, m20 = 0, m11 = 0, m02 = 0;
  double r00 = 0, r10 = 0, r01 = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    const CovPair& p = pairs[i];
    if (fold_of && (*fold_of)[p.curve] == skip_fold) continue;
    double dt = p.t - t0;
    if (std::abs(dt) >= h) continue;
    double ds = p.s - s0;
    double k = epanechnikov(ds / h) * epanechnikov(dt / h);
    if (k <= 0.0) continue;
    m00 += k;
    m10 += k * ds;
    m01 += k * dt;
    m20 += k * ds * ds;
    m11 += k * ds * dt;
    m02 += k * dt * dt;
    r00 += k * p.c;
    r10 += k * ds * p.c;
    r01 += k * dt * p.c;
  }
  if (!(m00 > 0.0)) return false;
  Eigen::Matrix3d m;
  m << m00, m10, m01, m10, m20, m11, m01, m11, m02;
  Eigen::Vector3d r(r00, r10, r01);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
  lu.setThreshold(1e-9);
  if (lu.rank() < 3) return false;
  *out = lu.solve(r)(0);
  return true;
}

}  // namespace

std::vector<double> bandwidth_candidates(double spacing, int n_candidates) {
  double lo = 2.0 * spacing, hi = 0.5;
  if (lo >= hi) return {hi};
  std::vector<double> out(n_candidates);
  for (int i = 0; i < n_candidates; ++i) {
    double f = n_candidates == 1 ? 0.0 : static_cast<double>(i) / (n_candidates - 1);
    out[i] = lo * std::pow(hi / lo, f);
  }
  return out;
}

double local_linear_at(const std::vector<Obs1D>& sorted_obs, double t0, double h) {
  for (double hh = h; hh <= kMaxBandwidth; hh *= kEscalation) {
    double v;
    if (fit_1d(sorted_obs, t0, hh, &v)) return v;
  }
  throw DegenerateDesign("local linear fit singular at maximum bandwidth");
}

Eigen::VectorXd local_linear_curve(const std::vector<Obs1D>& sorted_obs,
                                   const std::vector<double>& eval_points, double h) {
  Eigen::VectorXd out(eval_points.size());
  for (std::size_t i = 0; i < eval_points.size(); ++i)
    out[i] = local_linear_at(sorted_obs, eval_points[i], h);
  return out;
}

Eigen::VectorXd local_quadratic_diagonal(const std::vector<CovPair>& sorted_pairs,
                                         const std::vector<double>& eval_points, double h) {
  Eigen::VectorXd out(eval_points.size());
  for (std::size_t i = 0; i < eval_points.size(); ++i) {
    bool done = false;
    for (double hh = h; hh <= kMaxBandwidth && !done; hh *= kEscalation) {
      Window w = window_by_s(sorted_pairs, eval_points[i], hh, &CovPair::s);
      double v;
      if (fit_diag_quadratic(sorted_pairs, w.lo, w.hi, eval_points[i], hh, &v)) {
        out[i] = v;
        done = true;
      }
    }
    if (!done)
      throw DegenerateDesign("diagonal covariance fit singular at maximum bandwidth");
  }
  return out;
}

Eigen::MatrixXd local_linear_surface(const std::vector<CovPair>& sorted_pairs,
                                     const std::vector<double>& eval_s,
                                     const std::vector<double>& eval_t, double h) {
  Eigen::MatrixXd out(eval_s.size(), eval_t.size());
  for (std::size_t i = 0; i < eval_s.size(); ++i) {
    bool done = false;
    for (double hh = h; hh <= kMaxBandwidth && !done; hh *= kEscalation) {
      Window w = window_by_s(sorted_pairs, eval_s[i], hh, &CovPair::s);
      done = true;
      for (std::size_t j = 0; j < eval_t.size(); ++j) {
        double v;
        if (!fit_2d(sorted_pairs, w.lo, w.hi, eval_s[i], eval_t[j], hh, &v)) {
          done = false;
          break;
        }
        out(i, j) = v;
      }
    }
    if (!done)
      throw DegenerateDesign("covariance surface fit singular at maximum bandwidth");
  }
  return out;
}

namespace {

std::vector<int> fold_assignment(int n_curves, int n_folds) {
  std::vector<int> fold(n_curves);
  for (int i = 0; i < n_curves; ++i) fold[i] = i % n_folds;
  return fold;
}

}  // namespace

double cv_score_mean(const std::vector<Obs1D>& sorted_obs, const Grid& grid, double h,
                     int n_folds, int n_curves) {
  const auto fold = fold_assignment(n_curves, n_folds);
  double score = 0.0;
  Eigen::VectorXd fit(grid.size());
  for (int f = 0; f < n_folds; ++f) {
    bool ok = true;
    for (int g = 0; g < grid.size(); ++g) {
      double v = 0.0;
      bool got = false;
      for (double hh = h; hh <= kMaxBandwidth; hh *= kEscalation) {
        if (fit_1d(sorted_obs, grid.points[g], hh, &v, f, &fold)) {
          got = true;
          break;
        }
      }
      if (!got) {
        ok = false;
        break;
      }
      fit[g] = v;
    }
    if (!ok) return std::numeric_limits<double>::infinity();
    for (const auto& o : sorted_obs) {
      if (fold[o.curve] != f) continue;
      double p = interp_grid(grid, fit, o.t);
      score += (o.y - p) * (o.y - p);
    }
  }
  return score;
}

double cv_score_covariance(const std::vector<CovPair>& sorted_pairs, double h, int n_folds,
                           int n_curves) {
  // Held-out raw covariances predicted by a direct local-linear fit at each
  // pair location.  Evaluating on an interpolation grid instead would charge
  // small bandwidths for interpolation error near the diagonal ridge and push
  // the selection toward oversmoothing.
  const auto fold = fold_assignment(n_curves, n_folds);
  double score = 0.0;
  for (const auto& p : sorted_pairs) {
    const int f = fold[p.curve];
    double pred = 0.0;
    bool got = false;
    for (double hh = h; hh <= kMaxBandwidth && !got; hh *= kEscalation) {
      Window w = window_by_s(sorted_pairs, p.s, hh, &CovPair::s);
      got = fit_2d(sorted_pairs, w.lo, w.hi, p.s, p.t, hh, &pred, f, &fold);
    }
    if (!got) return std::numeric_limits<double>::infinity();
    score += (p.c - pred) * (p.c - pred);
  }
  return score;
}

namespace {

template <typename ScoreFn>
double pick_bandwidth(const std::vector<double>& candidates, ScoreFn&& score_fn) {
  double best_h = candidates.back();
  double best = std::numeric_limits<double>::infinity();
  for (double h : candidates) {
    double s = score_fn(h);
    if (s < best) {
      best = s;
      best_h = h;
    }
  }
  if (!std::isfinite(best))
    throw DegenerateDesign("bandwidth CV failed at every candidate bandwidth");
  return best_h;
}

}  // namespace

double select_bandwidth_mean(const std::vector<Obs1D>& sorted_obs, const Grid& grid,
                             int n_curves) {
  const int folds = std::min(5, std::max(2, n_curves));
  return pick_bandwidth(bandwidth_candidates(grid.spacing), [&](double h) {
    return cv_score_mean(sorted_obs, grid, h, folds, n_curves);
  });
}

double select_bandwidth_covariance(const std::vector<CovPair>& sorted_pairs,
                                   double spacing, int n_curves) {
  const int folds = std::min(5, std::max(2, n_curves));
  return pick_bandwidth(bandwidth_candidates(spacing), [&](double h) {
    return cv_score_covariance(sorted_pairs, h, folds, n_curves);
  });
}

}  // namespace fqma
