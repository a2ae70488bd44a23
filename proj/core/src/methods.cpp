#include "fqma/methods.hpp"

#include <algorithm>
#include <numeric>

namespace fqma {

std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::MA: return "MA";
    case MethodKind::SAIC: return "SAIC";
    case MethodKind::SBIC: return "SBIC";
    case MethodKind::FVE90: return "FVE90";
    case MethodKind::FVE95: return "FVE95";
    case MethodKind::AIC: return "AIC";
    case MethodKind::BIC: return "BIC";
  }
  return "?";
}

MethodKind method_kind_from_string(const std::string& name) {
  for (MethodKind k : {MethodKind::MA, MethodKind::SAIC, MethodKind::SBIC, MethodKind::FVE90,
                       MethodKind::FVE95, MethodKind::AIC, MethodKind::BIC})
    if (to_string(k) == name) return k;
  throw InvalidInput("unknown method: " + name);
}

std::string method_label(MethodKind kind, const SuiteConfig& cfg) {
  if (kind != MethodKind::MA) return to_string(kind);
  if (cfg.fixed_candidates) return "MA(fixed,K" + std::to_string(cfg.k_folds) + ")";
  return "MA(" + criterion_name(cfg.anchor) + "+-" + std::to_string(cfg.d) + ",K" +
         std::to_string(cfg.k_folds) + ")";
}

namespace {

Criterion selection_criterion(MethodKind kind) {
  switch (kind) {
    case MethodKind::FVE90: return Criterion::fve(0.90);
    case MethodKind::FVE95: return Criterion::fve(0.95);
    case MethodKind::AIC: return Criterion::aic();
    case MethodKind::BIC: return Criterion::bic();
    default: throw InvalidInput("not a selection method");
  }
}

}  // namespace

MethodRunner::MethodRunner(const FpcaModel& model, const Eigen::VectorXd& responses,
                           double tau, const SuiteConfig& config,
                           const std::vector<MethodKind>& methods)
    : model_(model), tau_(tau), config_(config), responses_(responses) {
  const bool wants_ma = std::count(methods.begin(), methods.end(), MethodKind::MA) > 0;
  const bool wants_smoothed =
      std::count(methods.begin(), methods.end(), MethodKind::SAIC) > 0 ||
      std::count(methods.begin(), methods.end(), MethodKind::SBIC) > 0;

  if (wants_ma || wants_smoothed) {
    candidates_ = config.fixed_candidates
                      ? fixed_candidate_set(model, *config.fixed_candidates)
                      : build_candidate_set(model, responses, tau, config.anchor, config.d);
    table_ = cv_table(model, responses, tau, candidates_, config.k_folds, std::nullopt,
                      config.threads);
    active_members_ = table_->members;
    for (int j : active_members_) active_fits_.push_back(fit_at(j));
    if (wants_ma) ma_weights_ = solve_weights(*table_, responses, tau);
    const int n = static_cast<int>(responses.size());
    for (MethodKind k : methods) {
      if (k == MethodKind::SAIC)
        smoothed_weights_[k] = saic_sbic_weights(active_fits_, n, SmoothedKind::SAIC);
      if (k == MethodKind::SBIC)
        smoothed_weights_[k] = saic_sbic_weights(active_fits_, n, SmoothedKind::SBIC);
    }
  }

  std::vector<int> range;
  if (config.selection_range) {
    range = *config.selection_range;
  } else {
    range.resize(model.retained() + 1);
    std::iota(range.begin(), range.end(), 0);
  }
  // selection with more parameters than the sample can support is pointless
  const int n = static_cast<int>(responses.size());
  std::erase_if(range, [&](int j) { return j + 1 >= n; });

  for (MethodKind k : methods) {
    if (k == MethodKind::MA || k == MethodKind::SAIC || k == MethodKind::SBIC) continue;
    Selection sel = select_j(model_, responses_, tau_, selection_criterion(k), range);
    selections_[k] = sel.j;
    fit_at(sel.j);
  }
}

const QuantileFit& MethodRunner::fit_at(int j) {
  auto it = fit_cache_.find(j);
  if (it == fit_cache_.end())
    it = fit_cache_.emplace(j, fit_candidate(model_, responses_, tau_, j)).first;
  return it->second;
}

const WeightVector& MethodRunner::ma_weights() const {
  if (!ma_weights_) throw InvalidInput("MA was not requested from this runner");
  return *ma_weights_;
}

const CvTable& MethodRunner::table() const {
  if (!table_) throw InvalidInput("no CV table: no averaging method requested");
  return *table_;
}

int MethodRunner::selected_level(MethodKind kind) const {
  auto it = selections_.find(kind);
  if (it == selections_.end()) throw InvalidInput("method was not requested");
  return it->second;
}

double MethodRunner::predict(MethodKind kind, const Eigen::VectorXd& scores) const {
  switch (kind) {
    case MethodKind::MA:
      return averaged_prediction(active_fits_, ma_weights(), scores);
    case MethodKind::SAIC:
    case MethodKind::SBIC:
      return averaged_prediction(active_fits_, smoothed_weights_.at(kind), scores);
    default: {
      const QuantileFit& fit = fit_cache_.at(selected_level(kind));
      return fqma::predict(fit, scores.head(fit.j));
    }
  }
}

AveragedParameters MethodRunner::parameters(MethodKind kind) const {
  switch (kind) {
    case MethodKind::MA:
      return averaged_parameters(active_fits_, ma_weights());
    case MethodKind::SAIC:
    case MethodKind::SBIC:
      return averaged_parameters(active_fits_, smoothed_weights_.at(kind));
    default: {
      const QuantileFit& fit = fit_cache_.at(selected_level(kind));
      return {fit.intercept, fit.slope_on_grid};
    }
  }
}

}  // namespace fqma
