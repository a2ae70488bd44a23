#include "fqma/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fqma/detail/weight_lp.hpp"
#include "fqma/parallel.hpp"
#include "fqma/rng.hpp"

namespace fqma {

CandidateSet build_candidate_set(const FpcaModel& model, const Eigen::VectorXd& responses,
                                 double tau, const Criterion& anchor_criterion, int d) {
  if (d < 0) throw InvalidInput("d must be nonnegative");
  // levels the sample cannot support are not anchor candidates
  const int top = std::min<int>(model.retained(), static_cast<int>(responses.size()) - 2);
  if (top < 0) throw InvalidInput("too few observations to anchor a candidate set");
  std::vector<int> full_range(top + 1);
  std::iota(full_range.begin(), full_range.end(), 0);
  Selection sel = select_j(model, responses, tau, anchor_criterion, full_range);

  CandidateSet out;
  out.anchor = sel.j;
  out.d = d;
  out.fve_unreachable = sel.fve_unreachable;
  for (int j = std::max(0, sel.j - d); j <= std::min(model.retained(), sel.j + d); ++j)
    out.members.push_back(j);
  return out;
}

CandidateSet fixed_candidate_set(const FpcaModel& model, const std::vector<int>& members) {
  CandidateSet out;
  out.d = -1;
  for (int j : members)
    if (j >= 0 && j <= model.retained()) out.members.push_back(j);
  std::sort(out.members.begin(), out.members.end());
  out.members.erase(std::unique(out.members.begin(), out.members.end()), out.members.end());
  if (out.members.empty()) throw InvalidInput("empty candidate set");
  out.anchor = out.members.front();
  return out;
}

int fold_of(int index, int n, int k) {
  const int m = n / k;
  return std::min(index / m, k - 1);
}

CvTable cv_table(const FpcaModel& model, const Eigen::VectorXd& responses, double tau,
                 const CandidateSet& candidates, int k, std::optional<unsigned> shuffle_seed,
                 int threads) {
  const int n = static_cast<int>(responses.size());
  if (k < 2 || k > n) throw InvalidInput("fold count must satisfy 2 <= k <= n");
  if (model.scores.rows() != n) throw DimensionMismatch("responses/scores row mismatch");

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.uniform_int(0, i)]);
  }

  std::vector<int> fold(n);
  for (int pos = 0; pos < n; ++pos) fold[perm[pos]] = fold_of(pos, n, k);
  std::vector<int> fold_size(k, 0);
  for (int i = 0; i < n; ++i) ++fold_size[fold[i]];
  const int min_train = n - *std::max_element(fold_size.begin(), fold_size.end());

  CvTable table;
  table.k = k;
  for (int j : candidates.members) {
    if (min_train > j + 1)
      table.members.push_back(j);
    else
      table.dropped_members.push_back(j);
  }
  if (table.members.empty()) throw InvalidInput("every candidate infeasible for these folds");

  const int m = static_cast<int>(table.members.size());
  table.predictions.resize(n, m);

  std::vector<std::pair<int, int>> tasks;  // (fold, member index)
  for (int f = 0; f < k; ++f)
    for (int c = 0; c < m; ++c) tasks.emplace_back(f, c);

  parallel_for(tasks.size(), threads, [&](std::size_t ti) {
    const auto [f, c] = tasks[ti];
    const int j = table.members[c];
    const int train_n = n - fold_size[f];
    Eigen::VectorXd yt(train_n);
    Eigen::MatrixXd st(train_n, j);
    int row = 0;
    for (int i = 0; i < n; ++i) {
      if (fold[i] == f) continue;
      yt[row] = responses[i];
      st.row(row) = model.scores.row(i).head(j);
      ++row;
    }
    QuantileFit fit = fit_qr(yt, st, tau);
    for (int i = 0; i < n; ++i) {
      if (fold[i] != f) continue;
      table.predictions(i, c) =
          predict(fit, model.scores.row(i).head(j).transpose());
    }
  });

  if (!table.predictions.allFinite()) throw Error("non-finite held-out prediction");
  return table;
}

double cv_criterion(const CvTable& table, const Eigen::VectorXd& responses, double tau,
                    const WeightVector& w) {
  const int n = static_cast<int>(responses.size());
  const int m = static_cast<int>(table.members.size());
  if (static_cast<int>(w.weights.size()) != m)
    throw DimensionMismatch("weight/candidate count mismatch");
  Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.weights.data(), m);
  Eigen::VectorXd resid = responses - table.predictions * wv;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += check_loss(resid[i], tau);
  return acc / n;
}

WeightVector solve_weights(const CvTable& table, const Eigen::VectorXd& responses,
                           double tau) {
  const int m = static_cast<int>(table.members.size());
  if (m == 0) throw InvalidInput("empty CV table");
  if (table.predictions.rows() != responses.size())
    throw DimensionMismatch("CV table/responses size mismatch");
  WeightVector out;
  if (m == 1) {
    out.weights = {1.0};
    return out;
  }
  Eigen::VectorXd w = detail::weight_lp(table.predictions, responses, tau);
  // solvers emit tiny negatives; clip and renormalize
  for (int i = 0; i < m; ++i)
    if (w[i] < 0.0) w[i] = 0.0;
  double total = w.sum();
  if (!(total > 0.0)) throw LpFailure("weight LP returned a zero vector");
  w /= total;
  out.weights.assign(w.data(), w.data() + m);
  return out;
}

WeightVector saic_sbic_weights(const std::vector<QuantileFit>& fits, int n,
                               SmoothedKind kind) {
  if (fits.empty()) throw InvalidInput("no fits to weight");
  std::vector<double> score(fits.size());
  bool any_perfect = false;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    score[i] = kind == SmoothedKind::SAIC ? aic(fits[i], n) : bic(fits[i], n);
    any_perfect = any_perfect || fits[i].perfect_fit;
  }
  WeightVector out;
  out.weights.assign(fits.size(), 0.0);
  if (any_perfect) {
    int count = 0;
    for (const auto& f : fits) count += f.perfect_fit ? 1 : 0;
    for (std::size_t i = 0; i < fits.size(); ++i)
      if (fits[i].perfect_fit) out.weights[i] = 1.0 / count;
    return out;
  }
  double top = -0.5 * *std::min_element(score.begin(), score.end());
  double denom = 0.0;
  for (double s : score) denom += std::exp(-0.5 * s - top);
  for (std::size_t i = 0; i < fits.size(); ++i)
    out.weights[i] = std::exp(-0.5 * score[i] - top) / denom;
  return out;
}

double averaged_prediction(const std::vector<QuantileFit>& fits, const WeightVector& weights,
                           const std::vector<Eigen::VectorXd>& scores_new_per_candidate) {
  if (fits.size() != weights.weights.size() ||
      fits.size() != scores_new_per_candidate.size())
    throw DimensionMismatch("fits/weights/scores count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < fits.size(); ++i)
    acc += weights.weights[i] * predict(fits[i], scores_new_per_candidate[i]);
  return acc;
}

double averaged_prediction(const std::vector<QuantileFit>& fits, const WeightVector& weights,
                           const Eigen::VectorXd& scores_new) {
  if (fits.size() != weights.weights.size())
    throw DimensionMismatch("fits/weights count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (scores_new.size() < fits[i].j)
      throw DimensionMismatch("score vector shorter than candidate truncation");
    acc += weights.weights[i] * predict(fits[i], scores_new.head(fits[i].j));
  }
  return acc;
}

AveragedParameters averaged_parameters(const std::vector<QuantileFit>& fits,
                                       const WeightVector& weights) {
  if (fits.empty() || fits.size() != weights.weights.size())
    throw DimensionMismatch("fits/weights count mismatch");
  const auto g = fits.front().slope_on_grid.size();
  AveragedParameters out;
  out.slope_on_grid = Eigen::VectorXd::Zero(g);
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (fits[i].slope_on_grid.size() != g)
      throw DimensionMismatch("fits live on different grids");
    out.intercept += weights.weights[i] * fits[i].intercept;
    out.slope_on_grid += weights.weights[i] * fits[i].slope_on_grid;
  }
  return out;
}

}  // namespace fqma
