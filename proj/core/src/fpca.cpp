#include "fqma/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fqma {

namespace {

std::vector<Obs1D> pooled_observations(const std::vector<SparseCurve>& curves) {
  std::vector<Obs1D> obs;
  std::size_t total = 0;
  for (const auto& c : curves) total += c.times.size();
  obs.reserve(total);
  for (std::size_t i = 0; i < curves.size(); ++i)
    for (std::size_t l = 0; l < curves[i].times.size(); ++l)
      obs.push_back({curves[i].times[l], curves[i].values[l], static_cast<int>(i)});
  std::sort(obs.begin(), obs.end(), [](const Obs1D& a, const Obs1D& b) { return a.t < b.t; });
  return obs;
}

}  // namespace

Eigen::VectorXd smooth_mean(const std::vector<SparseCurve>& curves, const Grid& grid,
                            Bandwidth bandwidth, double* bandwidth_used) {
  auto obs = pooled_observations(curves);
  if (obs.size() < 10)
    throw DegenerateDesign("mean smoothing needs at least 10 pooled observations");
  double h = bandwidth ? *bandwidth
                       : select_bandwidth_mean(obs, grid, static_cast<int>(curves.size()));
  if (h <= 0.0) throw InvalidInput("bandwidth must be positive");
  if (bandwidth_used) *bandwidth_used = h;
  return local_linear_curve(obs, grid.points, h);
}

std::pair<Eigen::MatrixXd, double> smooth_covariance(const std::vector<SparseCurve>& curves,
                                                     const Eigen::VectorXd& mean,
                                                     const Grid& grid, Bandwidth bandwidth,
                                                     double* bandwidth_used) {
  int with_repeats = 0;
  for (const auto& c : curves)
    if (c.n_obs() >= 2) ++with_repeats;
  if (curves.size() < 2 || with_repeats < 2)
    throw DegenerateDesign("covariance smoothing needs >= 2 curves with >= 2 observations");

  std::vector<CovPair> off_diag;  // ordered pairs l != l'
  std::vector<Obs1D> diag;        // squared centered values at l = l'
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const int ni = c.n_obs();
    std::vector<double> centered(ni);
    for (int l = 0; l < ni; ++l)
      centered[l] = c.values[l] - interp_grid(grid, mean, c.times[l]);
    for (int l = 0; l < ni; ++l) {
      diag.push_back({c.times[l], centered[l] * centered[l], static_cast<int>(i)});
      for (int m = 0; m < ni; ++m) {
        if (m == l) continue;
        off_diag.push_back(
            {c.times[l], c.times[m], centered[l] * centered[m], static_cast<int>(i)});
      }
    }
  }
  if (off_diag.empty())
    throw DegenerateDesign("no off-diagonal covariance pairs available");
  std::sort(off_diag.begin(), off_diag.end(),
            [](const CovPair& a, const CovPair& b) { return a.s < b.s; });
  std::sort(diag.begin(), diag.end(), [](const Obs1D& a, const Obs1D& b) { return a.t < b.t; });

  double h = bandwidth ? *bandwidth
                       : select_bandwidth_covariance(off_diag, grid.spacing,
                                                     static_cast<int>(curves.size()));
  if (h <= 0.0) throw InvalidInput("bandwidth must be positive");
  if (bandwidth_used) *bandwidth_used = h;

  Eigen::MatrixXd surface = local_linear_surface(off_diag, grid.points, grid.points, h);
  surface = 0.5 * (surface + surface.transpose()).eval();

  // noise variance: smoothed raw diagonal minus the ridge-corrected surface
  // diagonal, averaged over the central half of the domain, clipped at zero
  Eigen::VectorXd vhat = local_linear_curve(diag, grid.points, h);
  Eigen::VectorXd gdiag = local_quadratic_diagonal(off_diag, grid.points, h);
  double acc = 0.0;
  int count = 0;
  for (int g = 0; g < grid.size(); ++g) {
    double t = grid.points[g];
    if (t < 0.25 || t > 0.75) continue;
    acc += vhat[g] - gdiag[g];
    ++count;
  }
  double sigma2 = count > 0 ? std::max(0.0, acc / count) : 0.0;
  return {surface, sigma2};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigendecompose(const Eigen::MatrixXd& covariance,
                                                           const Grid& grid, int j_max) {
  const int g = grid.size();
  if (covariance.rows() != g || covariance.cols() != g)
    throw DimensionMismatch("covariance/grid size mismatch");
  Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym * grid.spacing);
  if (solver.info() != Eigen::Success)
    throw Error("eigendecomposition failed to converge");

  // Eigen returns ascending order; walk from the top.
  const Eigen::VectorXd& vals = solver.eigenvalues();
  const Eigen::MatrixXd& vecs = solver.eigenvectors();
  double top = vals[g - 1];
  std::vector<int> keep;
  for (int i = g - 1; i >= 0 && static_cast<int>(keep.size()) < j_max; --i) {
    if (vals[i] <= 0.0) break;
    if (vals[i] < 1e-10 * top) break;
    keep.push_back(i);
  }
  Eigen::VectorXd eigenvalues(keep.size());
  Eigen::MatrixXd eigenfunctions(g, keep.size());
  const double scale = 1.0 / std::sqrt(grid.spacing);
  for (std::size_t j = 0; j < keep.size(); ++j) {
    eigenvalues[j] = vals[keep[j]];
    Eigen::VectorXd phi = vecs.col(keep[j]) * scale;
    int arg = 0;
    phi.cwiseAbs().maxCoeff(&arg);
    if (phi[arg] < 0.0) phi = -phi;
    eigenfunctions.col(j) = phi;
  }
  return {eigenvalues, eigenfunctions};
}

Eigen::VectorXd pace_scores(const SparseCurve& curve, const FpcaModel& model, int n_scores) {
  if (n_scores < 1 || n_scores > model.retained())
    throw InvalidInput("requested score count outside retained eigenpairs");
  const int ni = curve.n_obs();
  Eigen::VectorXd centered(ni);
  for (int l = 0; l < ni; ++l)
    centered[l] = curve.values[l] - interp_grid(model.grid, model.mean, curve.times[l]);

  Eigen::MatrixXd sigma(ni, ni);
  for (int l = 0; l < ni; ++l)
    for (int m = l; m < ni; ++m) {
      double v = interp_surface(model.grid, model.covariance, curve.times[l], curve.times[m]);
      sigma(l, m) = v;
      sigma(m, l) = v;
    }
  sigma.diagonal().array() += model.noise_variance;

  Eigen::VectorXd sol;
  bool ok = false;
  {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    if (ldlt.info() == Eigen::Success) {
      sol = ldlt.solve(centered);
      double denom = centered.norm();
      double resid = (sigma * sol - centered).norm();
      ok = denom == 0.0 ? resid < 1e-10 : resid / denom < 1e-8;
    }
  }
  if (!ok) {
    double ridge = 1e-8 * sigma.trace() / ni;
    if (!(ridge > 0.0)) ridge = 1e-12;
    Eigen::MatrixXd reg = sigma;
    reg.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    if (ldlt.info() != Eigen::Success)
      throw SingularSystem("PACE covariance system unsolvable");
    sol = ldlt.solve(centered);
    double denom = centered.norm();
    double resid = (reg * sol - centered).norm();
    if (!(denom == 0.0 ? resid < 1e-8 : resid / denom < 1e-6))
      throw SingularSystem("PACE covariance system unsolvable after ridge");
  }

  Eigen::VectorXd out(n_scores);
  for (int j = 0; j < n_scores; ++j) {
    double dot = 0.0;
    for (int l = 0; l < ni; ++l)
      dot += interp_grid(model.grid, model.eigenfunctions.col(j), curve.times[l]) * sol[l];
    out[j] = model.eigenvalues[j] * dot;
  }
  return out;
}

FpcaModel fit_fpca(const std::vector<SparseCurve>& curves, const Grid& grid, int j_max,
                   const Bandwidths& bandwidths) {
  if (curves.size() < 2)
    throw DegenerateDesign("FPCA needs at least 2 curves");
  if (j_max < 1) throw InvalidInput("j_max must be >= 1");

  FpcaModel model;
  model.grid = grid;
  model.mean = smooth_mean(curves, grid, bandwidths.mean, &model.bandwidth_mean);
  auto [surface, sigma2] = smooth_covariance(curves, model.mean, grid, bandwidths.covariance,
                                             &model.bandwidth_covariance);
  model.covariance = std::move(surface);
  model.noise_variance = sigma2;
  std::tie(model.eigenvalues, model.eigenfunctions) =
      eigendecompose(model.covariance, grid, j_max);

  const int j = model.retained();
  model.fve_cumulative.resize(j);
  if (j > 0) {
    double total = model.eigenvalues.sum();
    double run = 0.0;
    for (int i = 0; i < j; ++i) {
      run += model.eigenvalues[i];
      model.fve_cumulative[i] = run / total;
    }
    model.fve_cumulative[j - 1] = 1.0;
  }

  model.scores.resize(curves.size(), j);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (j > 0) model.scores.row(i) = pace_scores(curves[i], model, j).transpose();
  }
  return model;
}

}  // namespace fqma
