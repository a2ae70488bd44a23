#include "fqma/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fqma/evaluation.hpp"
#include "fqma/parallel.hpp"
#include "fqma/rng.hpp"
#include "fqma/stats.hpp"

namespace fqma {

DesignSpec DesignSpec::design_I() { return DesignSpec{}; }

DesignSpec DesignSpec::design_II() {
  DesignSpec s;
  s.design = Design::II;
  s.j_max = 8;
  return s;
}

double eigenvalue_kappa(int j) { return std::pow(static_cast<double>(j), -1.2); }

double eigenfunction_phi(int j, double t) {
  return std::sqrt(2.0) * std::cos(j * M_PI * t);
}

double sigma_intercept(const DesignSpec& spec) {
  double acc = 0.0;
  for (int j = 1; j <= spec.coef_range(); ++j)
    acc += std::pow(j, -1.5) * std::sqrt(eigenvalue_kappa(j));
  return 2.0 * acc;
}

double theta_from_r2(const DesignSpec& spec) {
  if (!(spec.r_squared > 0.0 && spec.r_squared < 1.0))
    throw InvalidInput("r_squared must lie in (0,1)");
  double v1 = 0.0, v2 = 0.0;
  for (int j = 1; j <= spec.coef_range(); ++j) {
    double k = eigenvalue_kappa(j);
    v1 += std::pow(j, -2.0) * k;   // (j^{-1})^2 kappa_j
    v2 += std::pow(j, -3.0) * k;   // (j^{-1.5})^2 kappa_j
  }
  double a2 = sigma_intercept(spec);
  v2 += a2 * a2;
  return std::sqrt(spec.r_squared * v2 / ((1.0 - spec.r_squared) * v1));
}

double SimulatedDataset::true_quantile(const DesignSpec& spec,
                                       const Eigen::VectorXd& latent) const {
  const double z = stats::normal_quantile(spec.tau);
  double loc = 0.0, sig = sigma_intercept(spec);
  for (int j = 1; j <= spec.coef_range(); ++j) {
    loc += std::pow(j, -1.0) * latent[j - 1];
    sig += std::pow(j, -1.5) * latent[j - 1];
  }
  return theta * loc + z * sig;
}

Eigen::VectorXd true_slope_on_grid(const DesignSpec& spec, const Grid& grid) {
  const double z = stats::normal_quantile(spec.tau);
  const double theta = theta_from_r2(spec);
  Eigen::VectorXd slope = Eigen::VectorXd::Zero(grid.size());
  for (int j = 1; j <= spec.coef_range(); ++j) {
    double bj = theta * std::pow(j, -1.0) + z * std::pow(j, -1.5);
    for (int g = 0; g < grid.size(); ++g)
      slope[g] += bj * eigenfunction_phi(j, grid.points[g]);
  }
  return slope;
}

SimulatedDataset generate(const DesignSpec& spec) { return generate(spec, 0); }

SimulatedDataset generate(const DesignSpec& spec, std::uint64_t replication) {
  if (spec.n < 1) throw InvalidInput("need at least one training subject");
  const int total = spec.n + spec.n_test;
  const double theta = theta_from_r2(spec);
  const double z_tau = stats::normal_quantile(spec.tau);
  const double a2 = sigma_intercept(spec);
  const double root3 = std::sqrt(3.0);

  Rng base = Rng::for_replication(spec.seed, replication);
  Rng rng_times = base.substream(1);
  Rng rng_scores = base.substream(2);
  Rng rng_meas = base.substream(3);
  Rng rng_resp = base.substream(4);

  SimulatedDataset ds;
  ds.theta = theta;
  ds.true_intercept = z_tau * a2;
  ds.train_curves.reserve(spec.n);
  ds.test_curves.reserve(spec.n_test);
  ds.train_latent_scores.resize(spec.n, spec.j_max);
  ds.test_latent_scores.resize(spec.n_test, spec.j_max);
  ds.train_responses.resize(spec.n);
  ds.test_responses.resize(spec.n_test);
  ds.train_true_q.resize(spec.n);
  ds.test_true_q.resize(spec.n_test);

  for (int i = 0; i < total; ++i) {
    const int ni = static_cast<int>(rng_times.uniform_int(10, 12));
    std::vector<double> times(ni);
    for (;;) {
      for (int l = 0; l < ni; ++l) times[l] = rng_times.uniform();
      std::sort(times.begin(), times.end());
      if (std::adjacent_find(times.begin(), times.end()) == times.end()) break;
    }

    Eigen::VectorXd latent(spec.j_max);
    for (int j = 1; j <= spec.j_max; ++j)
      latent[j - 1] = std::sqrt(eigenvalue_kappa(j)) * rng_scores.uniform(-root3, root3);

    std::vector<double> values(ni);
    for (int l = 0; l < ni; ++l) {
      double x = 0.0;
      for (int j = 1; j <= spec.j_max; ++j)
        x += latent[j - 1] * eigenfunction_phi(j, times[l]);
      values[l] = x + rng_meas.normal(0.0, spec.noise_sd);
    }

    double loc = 0.0, sigma = a2;
    for (int j = 1; j <= spec.coef_range(); ++j) {
      loc += std::pow(j, -1.0) * latent[j - 1];
      sigma += std::pow(j, -1.5) * latent[j - 1];
    }
    if (!(sigma > 0.0)) throw Error("nonpositive conditional scale; generator invariant broken");
    double y = theta * loc + sigma * rng_resp.normal();
    double q = theta * loc + z_tau * sigma;

    SparseCurve curve(i + 1, std::move(times), std::move(values));
    if (i < spec.n) {
      ds.train_latent_scores.row(i) = latent.transpose();
      ds.train_responses[i] = y;
      ds.train_true_q[i] = q;
      ds.train_curves.push_back(std::move(curve));
    } else {
      const int k = i - spec.n;
      ds.test_latent_scores.row(k) = latent.transpose();
      ds.test_responses[k] = y;
      ds.test_true_q[k] = q;
      ds.test_curves.push_back(std::move(curve));
    }
  }
  return ds;
}

namespace {

double integrated_squared_error(const Eigen::VectorXd& est, const Eigen::VectorXd& truth,
                                double spacing) {
  double acc = 0.0;
  for (int i = 0; i < est.size(); ++i) {
    double d = est[i] - truth[i];
    double wgt = (i == 0 || i == est.size() - 1) ? 0.5 : 1.0;
    acc += wgt * d * d;
  }
  return acc * spacing;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto& methods = config.methods;
  if (methods.empty()) throw InvalidInput("no methods requested");
  const int reps = config.replications;
  const int m = static_cast<int>(methods.size());

  ExperimentResult result;
  result.rows.resize(static_cast<std::size_t>(reps) * m);

  SuiteConfig suite = config.suite;
  suite.threads = 1;  // replications already run in parallel

  const Grid grid(config.grid_size);
  const Eigen::VectorXd slope_truth = true_slope_on_grid(config.spec, grid);

  parallel_for(reps, config.threads, [&](std::size_t rep) {
    auto row_at = [&](int mi) -> ReplicationRow& {
      return result.rows[rep * m + mi];
    };
    for (int mi = 0; mi < m; ++mi) {
      row_at(mi).replication = static_cast<int>(rep);
      row_at(mi).method = method_label(methods[mi], suite);
    }
    try {
      SimulatedDataset ds = generate(config.spec, rep);
      FpcaModel model = fit_fpca(ds.train_curves, grid, config.spec.j_max, config.bandwidths);
      MethodRunner runner(model, ds.train_responses, config.spec.tau, suite, methods);

      const int nt = config.spec.n_test;
      Eigen::MatrixXd test_scores(nt, model.retained());
      for (int i = 0; i < nt; ++i)
        test_scores.row(i) =
            pace_scores(ds.test_curves[i], model, model.retained()).transpose();

      for (int mi = 0; mi < m; ++mi) {
        Eigen::VectorXd q_hat(nt);
        for (int i = 0; i < nt; ++i)
          q_hat[i] = runner.predict(methods[mi], test_scores.row(i).transpose());
        ReplicationRow& row = row_at(mi);
        row.efpe = efpe(ds.test_responses, q_hat, ds.test_true_q, config.spec.tau);
        AveragedParameters params = runner.parameters(methods[mi]);
        row.ise = integrated_squared_error(params.slope_on_grid, slope_truth, grid.spacing);
      }
    } catch (const std::exception& e) {
      for (int mi = 0; mi < m; ++mi) {
        row_at(mi).failed = true;
        row_at(mi).error = e.what();
      }
    }
  });
  return result;
}

std::vector<MethodSummary> ExperimentResult::summary() const {
  std::vector<MethodSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const MethodSummary& s) { return s.method == row.method; });
    if (it == out.end()) {
      out.push_back(MethodSummary{row.method, 0.0, 0.0, 0, 0});
      it = out.end() - 1;
    }
    if (row.failed) {
      ++it->n_failed;
    } else {
      it->mean_efpe += row.efpe;
      it->mean_mise += row.ise;
      ++it->n_ok;
    }
  }
  for (auto& s : out) {
    if (s.n_ok > 0) {
      s.mean_efpe /= s.n_ok;
      s.mean_mise /= s.n_ok;
    }
  }
  return out;
}

}  // namespace fqma
