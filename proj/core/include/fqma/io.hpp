#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fqma/averaging.hpp"
#include "fqma/evaluation.hpp"
#include "fqma/fpca.hpp"
#include "fqma/qr.hpp"
#include "fqma/simulation.hpp"

namespace fqma {
struct PipelineConfig;
struct PipelineResult;
}  // namespace fqma

namespace fqma::io {

// numeric output convention: 10 significant digits
std::string format_double(double v);

// ---- long-format curve CSV: subject_id,time,value -----------------------
std::vector<SparseCurve> read_curves_csv(const std::string& path);
void write_curves_csv(const std::string& path, const std::vector<SparseCurve>& curves);

// ---- responses CSV: subject_id,response ----------------------------------
std::vector<std::pair<std::int64_t, double>> read_responses_csv(const std::string& path);
void write_responses_csv(const std::string& path,
                         const std::vector<std::pair<std::int64_t, double>>& rows);

// ---- JSON round trips -----------------------------------------------------
std::string fpca_to_json(const FpcaModel& model);
FpcaModel fpca_from_json(const std::string& text);

std::string fit_to_json(const QuantileFit& fit);
QuantileFit fit_from_json(const std::string& text);

std::string weights_to_json(const WeightVector& w, const std::vector<int>& members);
WeightVector weights_from_json(const std::string& text, std::vector<int>* members = nullptr);

std::string cv_table_to_json(const CvTable& table);
CvTable cv_table_from_json(const std::string& text);

std::string backtest_to_json(const BacktestReport& report);

void save_text(const std::string& path, const std::string& text);
std::string load_text(const std::string& path);

// ---- plain-text key=value configuration -----------------------------------
// One `key = value` pair per line; '#' starts a comment.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  int get(const std::string& key, int fallback) const;
  std::int64_t get(const std::string& key, std::int64_t fallback) const;
  bool get(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma separated

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// ---- result writers ---------------------------------------------------------
void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir,
                              const std::string& stem);
void write_pipeline_outputs(const PipelineResult& result, const PipelineConfig& config);

}  // namespace fqma::io
