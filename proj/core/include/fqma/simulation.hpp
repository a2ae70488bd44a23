#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fqma/methods.hpp"

namespace fqma {

// Sparse-design data generator: curves are finite Karhunen-Loeve sums with
// cosine eigenfunctions and polynomially decaying eigenvalues, observed at a
// handful of uniform times with Gaussian measurement error; responses follow
// a heteroscedastic functional linear model whose conditional quantiles are
// linear in the latent scores.
struct DesignSpec {
  enum class Design { I, II };

  Design design = Design::I;
  int n = 300;
  int n_test = 100;
  double tau = 0.05;
  double r_squared = 0.5;
  int j_max = 20;              // 20 under design I, 8 under design II
  double noise_sd = 0.8944271909999159;  // sqrt(0.8) measurement noise
  std::uint64_t seed = 1;

  // coefficient truncation of the slope components (full j_max under design
  // I, first 3 modes under design II, which makes levels 3..6 exactly true)
  int coef_range() const { return design == Design::I ? j_max : 3; }

  static DesignSpec design_I();
  static DesignSpec design_II();
};

double eigenvalue_kappa(int j);          // j^{-1.2}
double eigenfunction_phi(int j, double t);  // sqrt(2) cos(j pi t)

// sigma(X) intercept: 2 * sum_{j<=range} j^{-1.5} kappa_j^{1/2}
double sigma_intercept(const DesignSpec& spec);

// Scale on the location component matching the requested population R^2:
// theta = sqrt(R^2 V2 / ((1-R^2) V1)) with V1 = Var(<b1, X>) and
// V2 = E[sigma(X)^2].
double theta_from_r2(const DesignSpec& spec);

struct SimulatedDataset {
  std::vector<SparseCurve> train_curves, test_curves;
  Eigen::VectorXd train_responses, test_responses;
  Eigen::MatrixXd train_latent_scores, test_latent_scores;  // xi = kappa^{1/2} Z
  Eigen::VectorXd train_true_q, test_true_q;  // conditional quantile at spec.tau
  double theta = 0.0;
  double true_intercept = 0.0;

  // true quantile from a latent score vector
  double true_quantile(const DesignSpec& spec, const Eigen::VectorXd& latent) const;
};

Eigen::VectorXd true_slope_on_grid(const DesignSpec& spec, const Grid& grid);

SimulatedDataset generate(const DesignSpec& spec);
SimulatedDataset generate(const DesignSpec& spec, std::uint64_t replication);

struct ExperimentConfig {
  DesignSpec spec;
  std::vector<MethodKind> methods{MethodKind::MA,    MethodKind::SAIC, MethodKind::SBIC,
                                  MethodKind::FVE90, MethodKind::FVE95, MethodKind::AIC,
                                  MethodKind::BIC};
  SuiteConfig suite;
  int replications = 50;
  int grid_size = 51;
  Bandwidths bandwidths;  // AUTO by default
  int threads = 0;        // 0 = hardware concurrency
};

struct ReplicationRow {
  int replication = 0;
  std::string method;
  double efpe = 0.0;
  double ise = 0.0;  // integrated squared slope error of this replication
  bool failed = false;
  std::string error;
};

struct MethodSummary {
  std::string method;
  double mean_efpe = 0.0;
  double mean_mise = 0.0;
  int n_ok = 0;
  int n_failed = 0;
};

struct ExperimentResult {
  std::vector<ReplicationRow> rows;
  std::vector<MethodSummary> summary() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace fqma
