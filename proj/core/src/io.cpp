#include "fqma/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fqma/pipeline.hpp"

namespace fqma::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows, int expect_cols = -1) {
  const int r = static_cast<int>(rows.size());
  int c = expect_cols;
  if (r > 0) c = static_cast<int>(rows[0].size());
  if (c < 0) c = 0;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

std::vector<SparseCurve> read_curves_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::map<std::int64_t, std::pair<std::vector<double>, std::vector<double>>> by_subject;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line_no == 1 && line.find("subject_id") != std::string::npos) continue;
    std::istringstream ss(line);
    std::string id_str, t_str, v_str;
    if (!std::getline(ss, id_str, ',') || !std::getline(ss, t_str, ',') ||
        !std::getline(ss, v_str, ','))
      throw ParseError("expected 'subject_id,time,value'", line_no);
    try {
      auto& slot = by_subject[std::stoll(id_str)];
      slot.first.push_back(std::stod(t_str));
      slot.second.push_back(std::stod(v_str));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("could not parse row '" + line + "'", line_no);
    }
  }
  std::vector<SparseCurve> out;
  out.reserve(by_subject.size());
  for (auto& [id, tv] : by_subject)
    out.emplace_back(id, std::move(tv.first), std::move(tv.second));
  return out;
}

void write_curves_csv(const std::string& path, const std::vector<SparseCurve>& curves) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << "subject_id,time,value\n";
  for (const auto& c : curves)
    for (int l = 0; l < c.n_obs(); ++l)
      out << c.subject_id << ',' << format_double(c.times[l]) << ','
          << format_double(c.values[l]) << '\n';
}

std::vector<std::pair<std::int64_t, double>> read_responses_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::vector<std::pair<std::int64_t, double>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line_no == 1 && line.find("subject_id") != std::string::npos) continue;
    std::istringstream ss(line);
    std::string id_str, y_str;
    if (!std::getline(ss, id_str, ',') || !std::getline(ss, y_str, ','))
      throw ParseError("expected 'subject_id,response'", line_no);
    try {
      out.emplace_back(std::stoll(id_str), std::stod(y_str));
    } catch (const std::exception&) {
      throw ParseError("could not parse row '" + line + "'", line_no);
    }
  }
  return out;
}

void write_responses_csv(const std::string& path,
                         const std::vector<std::pair<std::int64_t, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << "subject_id,response\n";
  for (const auto& [id, y] : rows) out << id << ',' << format_double(y) << '\n';
}

std::string fpca_to_json(const FpcaModel& model) {
  json j;
  j["grid_size"] = model.grid.size();
  j["mean"] = vec_to_json(model.mean);
  j["covariance"] = mat_to_json(model.covariance);
  j["noise_variance"] = model.noise_variance;
  j["eigenvalues"] = vec_to_json(model.eigenvalues);
  j["eigenfunctions"] = mat_to_json(model.eigenfunctions);
  j["scores"] = mat_to_json(model.scores);
  j["fve_cumulative"] = vec_to_json(model.fve_cumulative);
  j["bandwidth_mean"] = model.bandwidth_mean;
  j["bandwidth_covariance"] = model.bandwidth_covariance;
  return j.dump();
}

FpcaModel fpca_from_json(const std::string& text) {
  json j = json::parse(text);
  FpcaModel m;
  m.grid = Grid(j.at("grid_size").get<int>());
  m.mean = vec_from_json(j.at("mean"));
  m.covariance = mat_from_json(j.at("covariance"));
  m.noise_variance = j.at("noise_variance").get<double>();
  m.eigenvalues = vec_from_json(j.at("eigenvalues"));
  m.eigenfunctions = mat_from_json(j.at("eigenfunctions"));
  m.scores = mat_from_json(j.at("scores"), m.retained());
  m.fve_cumulative = vec_from_json(j.at("fve_cumulative"));
  m.bandwidth_mean = j.value("bandwidth_mean", 0.0);
  m.bandwidth_covariance = j.value("bandwidth_covariance", 0.0);
  return m;
}

std::string fit_to_json(const QuantileFit& fit) {
  json j;
  j["tau"] = fit.tau;
  j["j"] = fit.j;
  j["intercept"] = fit.intercept;
  j["coefficients"] = vec_to_json(fit.coefficients);
  j["slope_on_grid"] = vec_to_json(fit.slope_on_grid);
  j["in_sample_loss"] = fit.in_sample_loss;
  j["rank_deficient"] = fit.rank_deficient;
  j["perfect_fit"] = fit.perfect_fit;
  return j.dump();
}

QuantileFit fit_from_json(const std::string& text) {
  json j = json::parse(text);
  QuantileFit fit;
  fit.tau = j.at("tau").get<double>();
  fit.j = j.at("j").get<int>();
  fit.intercept = j.at("intercept").get<double>();
  fit.coefficients = vec_from_json(j.at("coefficients"));
  fit.slope_on_grid = vec_from_json(j.at("slope_on_grid"));
  fit.in_sample_loss = j.at("in_sample_loss").get<double>();
  fit.rank_deficient = j.value("rank_deficient", false);
  fit.perfect_fit = j.value("perfect_fit", false);
  return fit;
}

std::string weights_to_json(const WeightVector& w, const std::vector<int>& members) {
  json j;
  j["members"] = members;
  j["weights"] = w.weights;
  return j.dump();
}

WeightVector weights_from_json(const std::string& text, std::vector<int>* members) {
  json j = json::parse(text);
  WeightVector w;
  w.weights = j.at("weights").get<std::vector<double>>();
  if (members) *members = j.at("members").get<std::vector<int>>();
  return w;
}

std::string cv_table_to_json(const CvTable& table) {
  json j;
  j["k"] = table.k;
  j["members"] = table.members;
  j["dropped_members"] = table.dropped_members;
  j["predictions"] = mat_to_json(table.predictions);
  return j.dump();
}

CvTable cv_table_from_json(const std::string& text) {
  json j = json::parse(text);
  CvTable t;
  t.k = j.at("k").get<int>();
  t.members = j.at("members").get<std::vector<int>>();
  t.dropped_members = j.value("dropped_members", std::vector<int>{});
  t.predictions = mat_from_json(j.at("predictions"), static_cast<int>(t.members.size()));
  return t;
}

namespace {

json test_to_json(const TestResult& t) {
  return json{{"statistic", t.statistic},
              {"p_value", t.p_value},
              {"rejected", t.rejected},
              {"degenerate", t.degenerate}};
}

}  // namespace

std::string backtest_to_json(const BacktestReport& report) {
  json j;
  j["tau"] = report.tau;
  j["n_obs"] = report.n_obs;
  j["n_violations"] = report.n_violations;
  j["HIT"] = test_to_json(report.hit);
  j["POF"] = test_to_json(report.pof);
  j["CCI"] = test_to_json(report.cci);
  j["TBF"] = test_to_json(report.tbf);
  return j.dump();
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
}

std::string load_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Config Config::from_file(const std::string& path) { return from_string(load_text(path)); }

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    c.entries_[key] = value;
  }
  return c;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::stod(it->second);
}

int Config::get(const std::string& key, int fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::stoi(it->second);
}

std::int64_t Config::get(const std::string& key, std::int64_t fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::stoll(it->second);
}

bool Config::get(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidInput("boolean config value expected for " + key);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  auto it = entries_.find(key);
  if (it == entries_.end()) return out;
  std::istringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir,
                              const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream csv(fs::path(out_dir) / (stem + "_replications.csv"));
    csv << "replication,method,metric,value\n";
    for (const auto& row : result.rows) {
      if (row.failed) continue;
      csv << row.replication << ',' << row.method << ",efpe," << format_double(row.efpe)
          << '\n';
      csv << row.replication << ',' << row.method << ",ise," << format_double(row.ise)
          << '\n';
    }
  }
  json summary = json::array();
  for (const auto& s : result.summary()) {
    summary.push_back(json{{"method", s.method},
                           {"mean_efpe", s.mean_efpe},
                           {"mean_mise", s.mean_mise},
                           {"replications_ok", s.n_ok},
                           {"replications_failed", s.n_failed}});
  }
  save_text((fs::path(out_dir) / (stem + "_summary.json")).string(), summary.dump(2));
}

void write_pipeline_outputs(const PipelineResult& result, const PipelineConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);

  {
    std::ofstream csv(dir / "fpe.csv");
    csv << "asset,method,tau,partition,fpe\n";
    for (const auto& a : result.assets)
      for (const auto& p : a.partitions)
        for (const auto& [method, value] : p.fpe_by_method)
          csv << a.asset << ',' << method << ',' << format_double(config.tau) << ','
              << p.partition << ',' << format_double(value) << '\n';
  }
  {
    std::ofstream csv(dir / "fpe_summary.csv");
    csv << "asset,method,tau,mean_fpe\n";
    for (const auto& a : result.assets)
      for (const auto& [method, value] : a.mean_fpe)
        csv << a.asset << ',' << method << ',' << format_double(config.tau) << ','
            << format_double(value) << '\n';
  }
  {
    json weights = json::array();
    for (const auto& a : result.assets)
      for (const auto& p : a.partitions)
        weights.push_back(json{{"asset", a.asset},
                               {"partition", p.partition},
                               {"members", p.members},
                               {"weights", p.ma_weights}});
    save_text((dir / "weights.json").string(), weights.dump(2));
  }
  if (config.persist_cv_tables) {
    std::ofstream out(dir / "cv_tables.jsonl");
    for (const auto& a : result.assets)
      for (const auto& p : a.partitions)
        if (p.cv_table)
          out << json{{"asset", a.asset},
                      {"partition", p.partition},
                      {"table", json::parse(cv_table_to_json(*p.cv_table))}}
                     .dump()
              << '\n';
  }
  {
    std::ofstream csv(dir / "backtests.csv");
    csv << "asset,tau,method,test,statistic,p_value,rejected\n";
    for (const auto& a : result.assets) {
      for (const auto& [method, report] : a.backtests) {
        auto row = [&](const char* name, const TestResult& t) {
          csv << a.asset << ',' << format_double(config.tau) << ',' << method << ',' << name
              << ',' << format_double(t.statistic) << ',' << format_double(t.p_value) << ','
              << (t.rejected ? 1 : 0) << '\n';
        };
        row("HIT", report.hit);
        row("POF", report.pof);
        row("CCI", report.cci);
        row("TBF", report.tbf);
      }
    }
  }
  {
    json summary = json::array();
    for (const auto& a : result.assets) {
      json entry;
      entry["asset"] = a.asset;
      entry["failed"] = a.failed;
      if (a.failed) entry["error"] = a.error;
      entry["n_pairs"] = a.n_pairs;
      entry["warnings"] = a.warnings;
      json fpe_map = json::object();
      for (const auto& [method, value] : a.mean_fpe) fpe_map[method] = value;
      entry["mean_fpe"] = fpe_map;
      json bt = json::object();
      for (const auto& [method, report] : a.backtests)
        bt[method] = json::parse(backtest_to_json(report));
      entry["backtests"] = bt;
      json viols = json::object();
      for (const auto& [method, series] : a.violations) {
        json hits = json::array();
        for (auto h : series.hits) hits.push_back(static_cast<int>(h));
        viols[method] = hits;
      }
      entry["violations"] = viols;
      summary.push_back(std::move(entry));
    }
    save_text((dir / "summary.json").string(), summary.dump(2));
  }
}

}  // namespace fqma::io
