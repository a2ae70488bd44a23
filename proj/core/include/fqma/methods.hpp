#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fqma/averaging.hpp"

namespace fqma {

// The comparison set: cross-validation model averaging over a candidate set,
// the smoothed-information-criterion baselines on the same set, and four
// selection rules.
enum class MethodKind { MA, SAIC, SBIC, FVE90, FVE95, AIC, BIC };

std::string to_string(MethodKind kind);
MethodKind method_kind_from_string(const std::string& name);

struct SuiteConfig {
  Criterion anchor = Criterion::fve(0.90);  // anchor for the candidate set
  int d = 4;                                // candidate half-width around the anchor
  int k_folds = 4;                          // folds for the weight criterion
  std::optional<std::vector<int>> fixed_candidates;  // overrides anchor +- d
  std::optional<std::vector<int>> selection_range;   // default: 0..retained
  int threads = 1;
};

std::string method_label(MethodKind kind, const SuiteConfig& cfg);

// Fits every method once on a training set and answers prediction and
// parameter queries.  Candidate fits are cached by truncation level, so a
// selection method and an averaging method that land on the same level share
// the identical fit (with d = 0 the averaged prediction reproduces the
// anchor selection bit for bit).
class MethodRunner {
 public:
  MethodRunner(const FpcaModel& model, const Eigen::VectorXd& responses, double tau,
               const SuiteConfig& config, const std::vector<MethodKind>& methods);

  // scores: full retained-score vector for a new subject
  double predict(MethodKind kind, const Eigen::VectorXd& scores) const;

  AveragedParameters parameters(MethodKind kind) const;

  const CandidateSet& candidates() const { return candidates_; }
  const WeightVector& ma_weights() const;
  const CvTable& table() const;
  int selected_level(MethodKind kind) const;

 private:
  const QuantileFit& fit_at(int j);
  void require(MethodKind kind) const;

  const FpcaModel& model_;
  double tau_;
  SuiteConfig config_;
  Eigen::VectorXd responses_;

  CandidateSet candidates_;
  std::vector<int> active_members_;        // candidates surviving CV feasibility
  std::vector<QuantileFit> active_fits_;   // full-data fits of the survivors
  std::map<int, QuantileFit> fit_cache_;
  std::optional<CvTable> table_;
  std::optional<WeightVector> ma_weights_;
  std::map<MethodKind, WeightVector> smoothed_weights_;
  std::map<MethodKind, int> selections_;
};

}  // namespace fqma
