#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fqma/evaluation.hpp"
#include "fqma/market.hpp"
#include "fqma/methods.hpp"
#include "fqma/simulation.hpp"

namespace fqma {

struct AssetInput {
  std::string name;
  std::string csv_path;
};

struct PipelineConfig {
  std::vector<AssetInput> assets;
  double tau = 0.05;
  int k_folds = 2;
  int d = 8;
  Criterion anchor = Criterion::bic();
  std::vector<MethodKind> methods{MethodKind::MA,    MethodKind::SAIC, MethodKind::SBIC,
                                  MethodKind::FVE90, MethodKind::FVE95, MethodKind::AIC,
                                  MethodKind::BIC};
  int b_partitions = 200;
  double train_fraction = 0.7;
  enum class Split { Random, Chronological } split = Split::Random;
  std::uint64_t seed = 1;
  int grid_size = 51;
  int j_max = 20;
  Bandwidths bandwidths;
  int threads = 0;
  std::string out_dir;            // empty: no files written
  bool persist_cv_tables = true;  // weight/CV audit trail
};

struct PartitionOutcome {
  int partition = 0;
  std::vector<int> members;          // MA candidate levels
  std::vector<double> ma_weights;    // one per member
  std::map<std::string, double> fpe_by_method;
  std::optional<CvTable> cv_table;   // kept when the config asks for an audit trail
};

struct AssetOutcome {
  std::string asset;
  int n_pairs = 0;
  std::vector<PartitionOutcome> partitions;
  std::map<std::string, double> mean_fpe;
  // held-out violation indicators concatenated across partitions
  std::map<std::string, ViolationSeries> violations;
  std::map<std::string, BacktestReport> backtests;
  std::vector<std::string> warnings;
  bool failed = false;
  std::string error;
};

struct PipelineResult {
  std::vector<AssetOutcome> assets;
};

// Partitioned train/predict/backtest loop on a prepared sample, shared by
// the market pipeline and synthetic runs.
AssetOutcome run_asset_pipeline(const std::string& name,
                                const std::vector<SparseCurve>& curves,
                                const Eigen::VectorXd& responses, const PipelineConfig& config);

// Full market pipeline: ingest each asset CSV, build gap-day samples, run
// the partition loop, and (when out_dir is set) write the FPE table, weight
// diagnostics, per-partition CV tables, and backtest reports.  A failing
// asset is recorded and the remaining assets still run.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace fqma
