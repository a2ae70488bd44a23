// Command-line front end: simulation experiments, FPCA fitting, candidate
// fits, weight selection, quantile prediction, calibration backtests, and
// the full market pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fqma/io.hpp"
#include "fqma/pipeline.hpp"

namespace fs = std::filesystem;
using namespace fqma;

namespace {

Criterion parse_criterion(const std::string& name) {
  if (name == "AIC") return Criterion::aic();
  if (name == "BIC") return Criterion::bic();
  if (name.rfind("FVE", 0) == 0) {
    double pct = std::stod(name.substr(3));
    return Criterion::fve(pct / 100.0);
  }
  throw InvalidInput("unknown criterion: " + name);
}

Bandwidth parse_bandwidth(const std::string& text) {
  if (text.empty() || text == "auto" || text == "AUTO") return std::nullopt;
  return std::stod(text);
}

std::vector<MethodKind> parse_methods(const std::vector<std::string>& names) {
  std::vector<MethodKind> out;
  for (const auto& n : names) out.push_back(method_kind_from_string(n));
  return out;
}

io::Config load_config(const std::string& path) {
  return path.empty() ? io::Config::from_string("") : io::Config::from_file(path);
}

int run_simulate(const std::string& config_path, std::uint64_t seed, int threads,
                 const std::string& out_dir) {
  io::Config cfg = load_config(config_path);
  ExperimentConfig ec;
  ec.spec = cfg.get("design", std::string("I")) == "II" ? DesignSpec::design_II()
                                                        : DesignSpec::design_I();
  ec.spec.n = cfg.get("n", ec.spec.n);
  ec.spec.n_test = cfg.get("n_test", ec.spec.n_test);
  ec.spec.tau = cfg.get("tau", ec.spec.tau);
  ec.spec.r_squared = cfg.get("r2", ec.spec.r_squared);
  ec.spec.j_max = cfg.get("jmax", ec.spec.j_max);
  ec.spec.seed = seed;
  ec.replications = cfg.get("reps", 50);
  ec.grid_size = cfg.get("grid", 51);
  ec.threads = threads;
  ec.suite.anchor = parse_criterion(cfg.get("anchor", std::string("FVE90")));
  ec.suite.d = cfg.get("d", 4);
  ec.suite.k_folds = cfg.get("k", 4);
  ec.bandwidths.mean = parse_bandwidth(cfg.get("bw_mean", std::string("auto")));
  ec.bandwidths.covariance = parse_bandwidth(cfg.get("bw_cov", std::string("auto")));
  if (cfg.has("methods")) ec.methods = parse_methods(cfg.get_list("methods"));
  if (cfg.has("candidates")) {
    std::vector<int> fixed;
    for (const auto& s : cfg.get_list("candidates")) fixed.push_back(std::stoi(s));
    ec.suite.fixed_candidates = fixed;
  } else if (ec.spec.design == DesignSpec::Design::II) {
    ec.suite.fixed_candidates = std::vector<int>{0, 1, 2, 3, 4, 5, 6};
  }

  if (cfg.get("emit_data", false)) {
    SimulatedDataset ds = generate(ec.spec);
    fs::create_directories(out_dir);
    io::write_curves_csv((fs::path(out_dir) / "curves.csv").string(), ds.train_curves);
    std::vector<std::pair<std::int64_t, double>> resp;
    for (int i = 0; i < ds.train_responses.size(); ++i)
      resp.emplace_back(ds.train_curves[i].subject_id, ds.train_responses[i]);
    io::write_responses_csv((fs::path(out_dir) / "responses.csv").string(), resp);
    std::cout << "wrote curves.csv and responses.csv to " << out_dir << "\n";
    return 0;
  }

  ExperimentResult result = run_experiment(ec);
  io::write_experiment_outputs(result, out_dir, "experiment");
  std::cout << "method,mean_efpe,mean_mise,ok,failed\n";
  for (const auto& s : result.summary())
    std::cout << s.method << ',' << io::format_double(s.mean_efpe) << ','
              << io::format_double(s.mean_mise) << ',' << s.n_ok << ',' << s.n_failed << "\n";
  return 0;
}

int run_pipeline_cmd(const std::string& config_path, std::uint64_t seed, int threads,
                     const std::string& out_dir) {
  io::Config cfg = load_config(config_path);
  PipelineConfig pc;
  for (const auto& spec : cfg.get_list("assets")) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
      throw InvalidInput("asset entries look like NAME:path.csv");
    pc.assets.push_back({spec.substr(0, colon), spec.substr(colon + 1)});
  }
  pc.tau = cfg.get("tau", pc.tau);
  pc.k_folds = cfg.get("k", pc.k_folds);
  pc.d = cfg.get("d", pc.d);
  pc.anchor = parse_criterion(cfg.get("anchor", std::string("BIC")));
  pc.b_partitions = cfg.get("b", pc.b_partitions);
  pc.train_fraction = cfg.get("train_fraction", pc.train_fraction);
  pc.split = cfg.get("split", std::string("random")) == "chronological"
                 ? PipelineConfig::Split::Chronological
                 : PipelineConfig::Split::Random;
  pc.grid_size = cfg.get("grid", pc.grid_size);
  pc.j_max = cfg.get("jmax", pc.j_max);
  pc.bandwidths.mean = parse_bandwidth(cfg.get("bw_mean", std::string("auto")));
  pc.bandwidths.covariance = parse_bandwidth(cfg.get("bw_cov", std::string("auto")));
  if (cfg.has("methods")) pc.methods = parse_methods(cfg.get_list("methods"));
  pc.persist_cv_tables = cfg.get("persist_cv", true);
  pc.seed = seed;
  pc.threads = threads;
  pc.out_dir = out_dir;

  PipelineResult result = run_pipeline(pc);
  for (const auto& a : result.assets) {
    if (a.failed) {
      std::cout << a.asset << ": FAILED (" << a.error << ")\n";
      continue;
    }
    std::cout << a.asset << " (" << a.n_pairs << " pairs)\n";
    for (const auto& [method, value] : a.mean_fpe)
      std::cout << "  " << method << " fpe=" << io::format_double(value) << "\n";
  }
  std::cout << "outputs written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"functional quantile model averaging"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "fqma_out";
  std::uint64_t seed = 1;
  int threads = 0;
  app.add_option("--config", config_path, "key=value configuration file")->capture_default_str();
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "run a simulation experiment");

  std::string curves_path, model_path = "model.json";
  int grid_size = 51, j_max = 20;
  std::string bw_mean = "auto", bw_cov = "auto";
  auto* fpca_cmd = app.add_subcommand("fpca-fit", "fit an FPCA model to curves");
  fpca_cmd->add_option("--curves", curves_path, "long-format curves CSV")->required();
  fpca_cmd->add_option("--out-model", model_path, "output model JSON")->capture_default_str();
  fpca_cmd->add_option("--grid", grid_size, "grid size")->capture_default_str();
  fpca_cmd->add_option("--jmax", j_max, "maximum retained eigenpairs")->capture_default_str();
  fpca_cmd->add_option("--bw-mean", bw_mean, "mean bandwidth or 'auto'")->capture_default_str();
  fpca_cmd->add_option("--bw-cov", bw_cov, "covariance bandwidth or 'auto'")->capture_default_str();

  std::string responses_path, fit_path = "fit.json", criterion_name_opt;
  double tau = 0.05;
  int fit_j = -1;
  auto* fit_cmd = app.add_subcommand("fit", "fit one quantile regression candidate");
  fit_cmd->add_option("--model", model_path, "FPCA model JSON")->required();
  fit_cmd->add_option("--responses", responses_path, "responses CSV")->required();
  fit_cmd->add_option("--tau", tau, "quantile level")->capture_default_str();
  fit_cmd->add_option("--j", fit_j, "truncation level (overrides --criterion)");
  fit_cmd->add_option("--criterion", criterion_name_opt, "FVE90 | FVE95 | AIC | BIC");
  fit_cmd->add_option("--out-fit", fit_path, "output fit JSON")->capture_default_str();

  int d = 8, k_folds = 2;
  std::string anchor_name = "BIC", bundle_path = "bundle.json", cv_path;
  auto* weights_cmd = app.add_subcommand("weights", "cross-validation averaging weights");
  weights_cmd->add_option("--model", model_path, "FPCA model JSON")->required();
  weights_cmd->add_option("--responses", responses_path, "responses CSV")->required();
  weights_cmd->add_option("--tau", tau, "quantile level")->capture_default_str();
  weights_cmd->add_option("--anchor", anchor_name, "anchor criterion")->capture_default_str();
  weights_cmd->add_option("--d", d, "candidate half-width")->capture_default_str();
  weights_cmd->add_option("--k", k_folds, "CV folds")->capture_default_str();
  weights_cmd->add_option("--out-bundle", bundle_path, "weights + fits bundle JSON")
      ->capture_default_str();
  weights_cmd->add_option("--out-cv", cv_path, "optionally persist the CV table JSON");

  std::string predict_in, predictions_path = "predictions.csv";
  auto* predict_cmd = app.add_subcommand("predict", "plug-in quantile predictions");
  predict_cmd->add_option("--model", model_path, "FPCA model JSON")->required();
  predict_cmd->add_option("--fit", fit_path, "single-fit JSON");
  predict_cmd->add_option("--bundle", bundle_path, "weights bundle JSON");
  predict_cmd->add_option("--curves", predict_in, "curves CSV for new subjects")->required();
  predict_cmd
      ->add_option("--out-predictions", predictions_path, "output CSV")
      ->capture_default_str();

  std::string forecasts_path, report_path;
  auto* backtest_cmd = app.add_subcommand("backtest", "calibration tests of VaR forecasts");
  backtest_cmd->add_option("--forecasts", forecasts_path, "CSV with y,q_hat columns")
      ->required();
  backtest_cmd->add_option("--tau", tau, "quantile level")->capture_default_str();
  backtest_cmd->add_option("--out-report", report_path, "optional report JSON path");

  auto* pipe = app.add_subcommand("pipeline", "full train/average/predict/backtest run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(config_path, seed, threads, out_dir);
    if (pipe->parsed()) return run_pipeline_cmd(config_path, seed, threads, out_dir);

    if (fpca_cmd->parsed()) {
      auto curves = io::read_curves_csv(curves_path);
      Bandwidths bw{parse_bandwidth(bw_mean), parse_bandwidth(bw_cov)};
      FpcaModel model = fit_fpca(curves, Grid(grid_size), j_max, bw);
      io::save_text(model_path, io::fpca_to_json(model));
      std::cout << "retained " << model.retained()
                << " eigenpairs; noise_variance=" << io::format_double(model.noise_variance)
                << "\n";
      return 0;
    }

    if (fit_cmd->parsed()) {
      FpcaModel model = io::fpca_from_json(io::load_text(model_path));
      auto rows = io::read_responses_csv(responses_path);
      Eigen::VectorXd y(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) y[i] = rows[i].second;
      int level = fit_j;
      if (level < 0) {
        if (criterion_name_opt.empty())
          throw InvalidInput("pass --j or --criterion");
        std::vector<int> range;
        for (int j = 0; j <= std::min<int>(model.retained(), (int)rows.size() - 2); ++j)
          range.push_back(j);
        level = select_j(model, y, tau, parse_criterion(criterion_name_opt), range).j;
      }
      QuantileFit fit = fit_candidate(model, y, tau, level);
      io::save_text(fit_path, io::fit_to_json(fit));
      std::cout << "j=" << fit.j << " loss=" << io::format_double(fit.in_sample_loss) << "\n";
      return 0;
    }

    if (weights_cmd->parsed()) {
      FpcaModel model = io::fpca_from_json(io::load_text(model_path));
      auto rows = io::read_responses_csv(responses_path);
      Eigen::VectorXd y(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) y[i] = rows[i].second;
      CandidateSet cands = build_candidate_set(model, y, tau, parse_criterion(anchor_name), d);
      CvTable table = cv_table(model, y, tau, cands, k_folds);
      WeightVector w = solve_weights(table, y, tau);
      std::ostringstream bundle;
      bundle << "{\"tau\":" << tau << ",\"members\":[";
      for (std::size_t i = 0; i < table.members.size(); ++i)
        bundle << (i ? "," : "") << table.members[i];
      bundle << "],\"weights\":[";
      for (std::size_t i = 0; i < w.weights.size(); ++i)
        bundle << (i ? "," : "") << io::format_double(w.weights[i]);
      bundle << "],\"fits\":[";
      for (std::size_t i = 0; i < table.members.size(); ++i)
        bundle << (i ? "," : "")
               << io::fit_to_json(fit_candidate(model, y, tau, table.members[i]));
      bundle << "]}";
      io::save_text(bundle_path, bundle.str());
      if (!cv_path.empty()) io::save_text(cv_path, io::cv_table_to_json(table));
      std::cout << "weights:";
      for (std::size_t i = 0; i < w.weights.size(); ++i)
        std::cout << ' ' << table.members[i] << ':' << io::format_double(w.weights[i]);
      std::cout << "\n";
      return 0;
    }

    if (predict_cmd->parsed()) {
      FpcaModel model = io::fpca_from_json(io::load_text(model_path));
      auto curves = io::read_curves_csv(predict_in);
      std::ofstream out(predictions_path);
      out << "subject_id,prediction\n";
      const bool use_bundle = !predict_cmd->get_option("--bundle")->empty();
      std::vector<QuantileFit> fits;
      WeightVector w;
      QuantileFit single;
      if (use_bundle) {
        auto text = io::load_text(bundle_path);
        auto j = nlohmann::json::parse(text);
        for (const auto& f : j.at("fits"))
          fits.push_back(io::fit_from_json(f.dump()));
        w.weights = j.at("weights").get<std::vector<double>>();
      } else {
        single = io::fit_from_json(io::load_text(fit_path));
      }
      for (const auto& c : curves) {
        double value;
        if (use_bundle) {
          Eigen::VectorXd scores = pace_scores(c, model, model.retained());
          value = averaged_prediction(fits, w, scores);
        } else {
          Eigen::VectorXd scores =
              single.j > 0 ? pace_scores(c, model, single.j) : Eigen::VectorXd(0);
          value = predict(single, scores);
        }
        out << c.subject_id << ',' << io::format_double(value) << '\n';
      }
      std::cout << "wrote " << predictions_path << "\n";
      return 0;
    }

    if (backtest_cmd->parsed()) {
      std::ifstream in(forecasts_path);
      if (!in) throw InvalidInput("cannot open " + forecasts_path);
      std::vector<double> ys, qs;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.find_first_not_of("0123456789.,-eE+ \t\r") != std::string::npos)
          continue;  // header
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
          throw ParseError("expected 'y,q_hat'", line_no);
        ys.push_back(std::stod(a));
        qs.push_back(std::stod(b));
      }
      Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), ys.size());
      Eigen::VectorXd q = Eigen::Map<Eigen::VectorXd>(qs.data(), qs.size());
      BacktestReport report = backtest(make_violation_series(y, q, tau));
      auto show = [&](const char* name, const TestResult& t) {
        std::cout << name << ": statistic=" << io::format_double(t.statistic)
                  << " p=" << io::format_double(t.p_value)
                  << (t.rejected ? " REJECTED" : " ok") << (t.degenerate ? " (degenerate)" : "")
                  << "\n";
      };
      std::cout << "violations: " << report.n_violations << "/" << report.n_obs << "\n";
      show("HIT", report.hit);
      show("POF", report.pof);
      show("CCI", report.cci);
      show("TBF", report.tbf);
      if (!report_path.empty()) io::save_text(report_path, io::backtest_to_json(report));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
