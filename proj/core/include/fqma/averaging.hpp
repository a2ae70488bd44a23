#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fqma/qr.hpp"

namespace fqma {

// Truncation levels within distance d of a criterion-selected anchor,
// clipped to [0, retained eigenpairs].
struct CandidateSet {
  int anchor = 0;
  int d = 0;
  std::vector<int> members;  // sorted, unique, nonempty
  bool fve_unreachable = false;
};

CandidateSet build_candidate_set(const FpcaModel& model, const Eigen::VectorXd& responses,
                                 double tau, const Criterion& anchor_criterion, int d);

// Candidate set fixed externally (clipped to the retained eigenpairs).
CandidateSet fixed_candidate_set(const FpcaModel& model, const std::vector<int>& members);

// Held-out prediction matrix: entry (i, m) is the fold-(i)-excluded
// prediction of observation i under candidate m.  Observation i belongs to
// fold floor(i/M) with M = floor(n/K); the remainder joins the last fold.
// FPCA scores stay fixed (fitted once on all data); only the QR coefficients
// are refit per fold.  Candidates whose parameter count a fold cannot
// support are dropped and reported in dropped_members.
struct CvTable {
  int k = 0;
  std::vector<int> members;          // surviving candidate truncation levels
  Eigen::MatrixXd predictions;       // n x |members|
  std::vector<int> dropped_members;  // infeasible candidates, if any
};

CvTable cv_table(const FpcaModel& model, const Eigen::VectorXd& responses, double tau,
                 const CandidateSet& candidates, int k,
                 std::optional<unsigned> shuffle_seed = std::nullopt, int threads = 1);

int fold_of(int index, int n, int k);

struct WeightVector {
  std::vector<double> weights;  // nonnegative, sum to one
};

// CV criterion (1/n) sum_i rho_tau(y_i - sum_m w_m pred(i,m)).
double cv_criterion(const CvTable& table, const Eigen::VectorXd& responses, double tau,
                    const WeightVector& w);

// Minimizes the CV criterion over the weight simplex, as the LP
//   min tau*1'u + (1-tau)*1'v
//   s.t. sum_m w_m pred(i,m) + u_i - v_i = y_i, sum w = 1, w,u,v >= 0.
WeightVector solve_weights(const CvTable& table, const Eigen::VectorXd& responses, double tau);

enum class SmoothedKind { SAIC, SBIC };

// exp(-score/2) weights, computed with max-subtraction; perfect fits (score
// sentinel) split all the weight equally among themselves.
WeightVector saic_sbic_weights(const std::vector<QuantileFit>& fits, int n, SmoothedKind kind);

double averaged_prediction(const std::vector<QuantileFit>& fits, const WeightVector& weights,
                           const std::vector<Eigen::VectorXd>& scores_new_per_candidate);

// Convenience: slices nested prefixes of one score vector per candidate.
double averaged_prediction(const std::vector<QuantileFit>& fits, const WeightVector& weights,
                           const Eigen::VectorXd& scores_new);

struct AveragedParameters {
  double intercept = 0.0;
  Eigen::VectorXd slope_on_grid;
};

AveragedParameters averaged_parameters(const std::vector<QuantileFit>& fits,
                                       const WeightVector& weights);

}  // namespace fqma
