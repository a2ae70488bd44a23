#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "fqma/io.hpp"
#include "fqma/rng.hpp"
#include "helpers.hpp"

using namespace fqma;

TEST_CASE("grid is equispaced over [0,1]") {
  Grid g(51);
  CHECK(g.size() == 51);
  CHECK(g.points.front() == 0.0);
  CHECK(g.points.back() == 1.0);
  CHECK(g.spacing == doctest::Approx(1.0 / 50).epsilon(1e-15));
  CHECK_THROWS_AS(Grid(1), InvalidInput);
}

TEST_CASE("curves sort their observations and reject duplicates") {
  SparseCurve c(7, {0.5, 0.1, 0.9}, {2.0, 1.0, 3.0});
  CHECK(c.times[0] == 0.1);
  CHECK(c.values[0] == 1.0);
  CHECK(c.values[2] == 3.0);
  CHECK_THROWS_AS(SparseCurve(1, {0.2, 0.2}, {1.0, 2.0}), InvalidInput);
  CHECK_THROWS_AS(SparseCurve(1, {0.2}, {1.0, 2.0}), InvalidInput);
  CHECK_THROWS_AS(SparseCurve(1, {1.7}, {1.0}), InvalidInput);
}

TEST_CASE("rescaling maps an arbitrary interval onto [0,1]") {
  std::vector<SparseCurve> curves;
  {
    std::vector<SparseCurve> raw;
    SparseCurve c(1, {0.0, 0.5, 1.0}, {1.0, 2.0, 3.0});
    c.times = {10.0, 15.0, 20.0};  // stand-in for an unscaled input
    raw.push_back(c);
    auto map = rescale_curves(raw, 10.0, 20.0);
    CHECK(map.scale() == 10.0);
    CHECK(raw[0].times[0] == doctest::Approx(0.0));
    CHECK(raw[0].times[1] == doctest::Approx(0.5));
    CHECK(raw[0].times[2] == doctest::Approx(1.0));
    curves = raw;
  }
}

TEST_CASE("grid interpolation is linear and clamps to the domain") {
  Grid g(11);
  Eigen::VectorXd v(11);
  for (int i = 0; i < 11; ++i) v[i] = 2.0 * g.points[i] + 1.0;
  CHECK(interp_grid(g, v, 0.37) == doctest::Approx(1.74).epsilon(1e-12));
  CHECK(interp_grid(g, v, 0.0) == doctest::Approx(1.0));
  CHECK(interp_grid(g, v, 1.0) == doctest::Approx(3.0));

  Eigen::MatrixXd s(11, 11);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) s(i, j) = g.points[i] + 3.0 * g.points[j];
  CHECK(interp_surface(g, s, 0.33, 0.71) == doctest::Approx(0.33 + 3.0 * 0.71).epsilon(1e-12));
}

TEST_CASE("curve CSV round trip") {
  Rng rng(42);
  std::vector<SparseCurve> curves;
  for (int i = 0; i < 5; ++i) {
    int n = static_cast<int>(rng.uniform_int(3, 8));
    std::vector<double> t, v;
    double at = 0.01;
    for (int l = 0; l < n; ++l) {
      at += rng.uniform(0.01, 0.1);
      t.push_back(std::min(at, 0.99));
      v.push_back(rng.normal());
    }
    curves.emplace_back(i + 1, t, v);
  }
  auto path = std::filesystem::temp_directory_path() / "fqma_curves_test.csv";
  io::write_curves_csv(path.string(), curves);
  auto back = io::read_curves_csv(path.string());
  REQUIRE(back.size() == curves.size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    CHECK(back[i].subject_id == curves[i].subject_id);
    REQUIRE(back[i].n_obs() == curves[i].n_obs());
    for (int l = 0; l < curves[i].n_obs(); ++l) {
      CHECK(back[i].times[l] == doctest::Approx(curves[i].times[l]).epsilon(1e-9));
      CHECK(back[i].values[l] == doctest::Approx(curves[i].values[l]).epsilon(1e-9));
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("fpca model JSON round trip preserves the PACE inputs") {
  auto model = testutil::make_sine_model(21, {1.0, 0.4, 0.1}, 0.25);
  auto text = io::fpca_to_json(model);
  FpcaModel back = io::fpca_from_json(text);
  CHECK(back.grid.size() == model.grid.size());
  CHECK((back.covariance - model.covariance).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.eigenvalues - model.eigenvalues).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.noise_variance == model.noise_variance);

  SparseCurve probe(1, {0.21, 0.43, 0.77}, {0.4, -0.2, 0.1});
  auto s1 = pace_scores(probe, model, model.retained());
  auto s2 = pace_scores(probe, back, back.retained());
  CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("config parser handles comments, types and lists") {
  auto cfg = io::Config::from_string(
      "# comment\n"
      "tau = 0.05\n"
      "k = 2           # trailing comment\n"
      "methods = MA, SBIC ,FVE90\n"
      "split=chronological\n"
      "persist_cv = false\n");
  CHECK(cfg.get("tau", 0.0) == doctest::Approx(0.05));
  CHECK(cfg.get("k", 0) == 2);
  CHECK(cfg.get("split", std::string()) == "chronological");
  CHECK(cfg.get("persist_cv", true) == false);
  auto methods = cfg.get_list("methods");
  REQUIRE(methods.size() == 3);
  CHECK(methods[1] == "SBIC");
  CHECK_THROWS_AS(io::Config::from_string("novalue\n"), ParseError);
}

TEST_CASE("format_double prints 10 significant digits") {
  CHECK(io::format_double(0.123456789012345) == "0.123456789");
  CHECK(io::format_double(3.0) == "3");
}
