#include "fqma/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fqma/io.hpp"
#include "fqma/parallel.hpp"
#include "fqma/rng.hpp"

namespace fqma {

namespace {

struct PartitionData {
  std::vector<int> train_idx, test_idx;
};

PartitionData make_partition(int n, int n_test, const PipelineConfig& config, int partition) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (config.split == PipelineConfig::Split::Random) {
    Rng rng = Rng::for_replication(config.seed, static_cast<std::uint64_t>(partition));
    for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_int(0, i)]);
  }
  PartitionData part;
  part.train_idx.assign(idx.begin(), idx.end() - n_test);
  part.test_idx.assign(idx.end() - n_test, idx.end());
  return part;
}

}  // namespace

AssetOutcome run_asset_pipeline(const std::string& name,
                                const std::vector<SparseCurve>& curves,
                                const Eigen::VectorXd& responses,
                                const PipelineConfig& config) {
  const int n = static_cast<int>(curves.size());
  if (responses.size() != n) throw DimensionMismatch("curves/responses count mismatch");
  const int n_test = static_cast<int>(std::floor((1.0 - config.train_fraction) * n));
  if (n_test < 1 || n - n_test < 3)
    throw InsufficientData("sample too small for the requested train/test split");

  const int b =
      config.split == PipelineConfig::Split::Chronological ? 1 : config.b_partitions;

  AssetOutcome outcome;
  outcome.asset = name;
  outcome.n_pairs = n;
  outcome.partitions.resize(b);

  const Grid grid(config.grid_size);
  std::vector<std::map<std::string, std::vector<std::uint8_t>>> hits_per_partition(b);
  std::vector<std::vector<std::string>> warnings_per_partition(b);

  SuiteConfig suite;
  suite.anchor = config.anchor;
  suite.d = config.d;
  suite.k_folds = config.k_folds;
  suite.threads = 1;

  parallel_for(b, config.threads, [&](std::size_t pi) {
    PartitionData part = make_partition(n, n_test, config, static_cast<int>(pi));
    std::vector<SparseCurve> train_curves;
    train_curves.reserve(part.train_idx.size());
    Eigen::VectorXd y_train(part.train_idx.size());
    for (std::size_t i = 0; i < part.train_idx.size(); ++i) {
      train_curves.push_back(curves[part.train_idx[i]]);
      y_train[i] = responses[part.train_idx[i]];
    }

    FpcaModel model = fit_fpca(train_curves, grid, config.j_max, config.bandwidths);
    MethodRunner runner(model, y_train, config.tau, suite, config.methods);
    if (!runner.table().dropped_members.empty()) {
      std::string msg = "partition " + std::to_string(pi) + ": dropped candidates";
      for (int j : runner.table().dropped_members) msg += " " + std::to_string(j);
      warnings_per_partition[pi].push_back(msg);
    }

    PartitionOutcome& po = outcome.partitions[pi];
    po.partition = static_cast<int>(pi);
    po.members = runner.table().members;
    po.ma_weights = runner.ma_weights().weights;
    if (config.persist_cv_tables) po.cv_table = runner.table();

    Eigen::VectorXd y_test(n_test);
    Eigen::MatrixXd test_scores(n_test, model.retained());
    for (int i = 0; i < n_test; ++i) {
      y_test[i] = responses[part.test_idx[i]];
      test_scores.row(i) =
          pace_scores(curves[part.test_idx[i]], model, model.retained()).transpose();
    }

    for (MethodKind kind : config.methods) {
      Eigen::VectorXd q_hat(n_test);
      for (int i = 0; i < n_test; ++i)
        q_hat[i] = runner.predict(kind, test_scores.row(i).transpose());
      const std::string label = method_label(kind, suite);
      po.fpe_by_method[label] = fpe(y_test, q_hat, config.tau);
      auto& hits = hits_per_partition[pi][label];
      hits.resize(n_test);
      for (int i = 0; i < n_test; ++i) hits[i] = y_test[i] <= q_hat[i] ? 1 : 0;
    }
  });

  for (int pi = 0; pi < b; ++pi) {
    for (const auto& [label, hits] : hits_per_partition[pi]) {
      auto& series = outcome.violations[label];
      series.tau = config.tau;
      series.hits.insert(series.hits.end(), hits.begin(), hits.end());
    }
    for (auto& w : warnings_per_partition[pi]) outcome.warnings.push_back(std::move(w));
  }
  for (const auto& po : outcome.partitions)
    for (const auto& [label, value] : po.fpe_by_method) outcome.mean_fpe[label] += value / b;
  for (const auto& [label, series] : outcome.violations)
    outcome.backtests[label] = backtest(series);
  return outcome;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.assets.empty()) throw InvalidInput("no assets configured");
  PipelineResult result;
  for (const auto& asset : config.assets) {
    AssetOutcome outcome;
    try {
      auto records = ingest(asset.csv_path, asset.name);
      auto sample = build_gap_day_sample(records);
      std::vector<SparseCurve> curves;
      Eigen::VectorXd responses(sample.pairs.size());
      for (std::size_t i = 0; i < sample.pairs.size(); ++i) {
        curves.push_back(sample.pairs[i].covariate);
        responses[i] = sample.pairs[i].response;
      }
      outcome = run_asset_pipeline(asset.name, curves, responses, config);
      if (!sample.dropped_days.empty())
        outcome.warnings.push_back(std::to_string(sample.dropped_days.size()) +
                                   " days dropped for sparse hourly coverage");
    } catch (const std::exception& e) {
      outcome.asset = asset.name;
      outcome.failed = true;
      outcome.error = e.what();
    }
    result.assets.push_back(std::move(outcome));
    if (!config.out_dir.empty()) io::write_pipeline_outputs(result, config);  // flush progress
  }
  return result;
}

}  // namespace fqma
