#include <doctest.h>

#include "fqma/evaluation.hpp"
#include "fqma/rng.hpp"
#include "fqma/stats.hpp"

using namespace fqma;

TEST_CASE("fpe basics") {
  Eigen::VectorXd y(3), q(3);
  y << 1, 2, 3;
  q = y;
  CHECK(fpe(y, q, 0.5) == 0.0);

  Eigen::VectorXd y1(1), q1(1);
  y1 << 1.0;
  q1 << 0.0;
  CHECK(fpe(y1, q1, 0.05) == doctest::Approx(0.05));

  // tau = 1/2: half the mean absolute deviation about the forecast
  Rng rng(301);
  Eigen::VectorXd ys(200), qs = Eigen::VectorXd::Constant(200, 0.3);
  for (int i = 0; i < 200; ++i) ys[i] = rng.normal();
  double mad = (ys.array() - 0.3).abs().mean();
  CHECK(fpe(ys, qs, 0.5) == doctest::Approx(0.5 * mad).epsilon(1e-12));

  CHECK_THROWS_AS(fpe(Eigen::VectorXd(0), Eigen::VectorXd(0), 0.5), EmptyTestSet);
}

TEST_CASE("efpe identities") {
  Rng rng(302);
  int n = 500;
  Eigen::VectorXd y(n), q_true(n), q_hat(n);
  for (int i = 0; i < n; ++i) {
    q_true[i] = rng.normal();
    y[i] = q_true[i] + rng.normal();
    q_hat[i] = q_true[i] + 0.3 * rng.normal();
  }
  CHECK(efpe(y, q_true, q_true, 0.1) == 0.0);  // exact, not just approximate
  // FPE - EFPE = mean check loss at the true quantile
  double lhs = fpe(y, q_hat, 0.1) - efpe(y, q_hat, q_true, 0.1);
  CHECK(lhs == doctest::Approx(fpe(y, q_true, 0.1)).epsilon(1e-12));
}

TEST_CASE("efpe of a shifted forecast is positive at scale") {
  Rng rng(303);
  int n = 20000;
  double tau = 0.25;
  Eigen::VectorXd y(n), q_true(n), q_hat(n);
  double z = stats::normal_quantile(tau);
  for (int i = 0; i < n; ++i) {
    double mu = rng.uniform(-1.0, 1.0);
    y[i] = mu + rng.normal();
    q_true[i] = mu + z;
    q_hat[i] = q_true[i] + 0.4;
  }
  CHECK(efpe(y, q_hat, q_true, tau) > 0.0);
}

TEST_CASE("mise quadrature") {
  int g = 51;
  Grid grid(g);
  Eigen::VectorXd truth(g);
  for (int i = 0; i < g; ++i) truth[i] = std::sin(grid.points[i]);

  std::vector<Eigen::VectorXd> same{truth, truth};
  CHECK(mise(same, truth, grid.spacing) == 0.0);

  Eigen::VectorXd plus1 = truth.array() + 1.0;
  CHECK(mise({plus1}, truth, grid.spacing) == doctest::Approx(1.0).epsilon(1e-6));

  Eigen::VectorXd plus_t(g);
  for (int i = 0; i < g; ++i) plus_t[i] = truth[i] + grid.points[i];
  CHECK(mise({plus_t}, truth, grid.spacing) == doctest::Approx(1.0 / 3).epsilon(1e-3));
}

TEST_CASE("violation series basics") {
  Eigen::VectorXd y(4), q(4);
  y << -1.0, 0.5, -0.2, 0.0;
  q << -0.5, 0.0, -0.2, 0.1;
  ViolationSeries s = make_violation_series(y, q, 0.05);
  CHECK(s.hits == std::vector<std::uint8_t>{1, 0, 1, 1});
  auto stats = s.hit_stats();
  CHECK(stats[0] == doctest::Approx(0.05 - 1.0));
  CHECK(stats[1] == doctest::Approx(0.05));
}

TEST_CASE("POF statistic matches the closed form") {
  // x = 0 out of T = 100 at tau = 0.05: LR = -2 log(0.95^100)
  double expect = -2.0 * 100.0 * std::log(0.95);
  CHECK(pof_statistic(100, 0, 0.05) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(10.2586589).epsilon(1e-6));

  // violation rate exactly tau makes the statistic vanish
  CHECK(pof_statistic(1000, 50, 0.05) == 0.0);
}

TEST_CASE("violation rate exactly tau: POF statistic is identically zero") {
  ViolationSeries s;
  s.tau = 0.05;
  s.hits.assign(1000, 0);
  for (int i = 19; i < 1000; i += 20) s.hits[i] = 1;  // every 20th step
  REQUIRE(s.n_violations() == 50);
  BacktestReport r = backtest(s);
  CHECK(r.pof.statistic == doctest::Approx(0.0));
  CHECK(r.pof.p_value == doctest::Approx(1.0));
  CHECK_FALSE(r.pof.rejected);
  CHECK_FALSE(r.hit.rejected);
  // a metronome pattern is itself a form of dependence (violations never
  // cluster), so the independence statistic is positive here
  CHECK(r.cci.statistic > 0.0);
}

TEST_CASE("independently scattered violations pass the independence test") {
  Rng rng(309);
  ViolationSeries s;
  s.tau = 0.05;
  s.hits.assign(1000, 0);
  int placed = 0;
  while (placed < 50) {
    int pos = static_cast<int>(rng.uniform_int(0, 999));
    if (!s.hits[pos]) {
      s.hits[pos] = 1;
      ++placed;
    }
  }
  BacktestReport r = backtest(s);
  CHECK_FALSE(r.cci.rejected);
  CHECK(r.pof.statistic == doctest::Approx(0.0));
}

TEST_CASE("no violations: POF rejects, CCI and TBF are degenerate") {
  ViolationSeries s;
  s.tau = 0.05;
  s.hits.assign(100, 0);
  BacktestReport r = backtest(s);
  CHECK(r.pof.statistic == doctest::Approx(10.2586589).epsilon(1e-6));
  CHECK(r.pof.rejected);
  CHECK(r.cci.degenerate);
  CHECK(r.cci.p_value == 1.0);
  CHECK(r.tbf.degenerate);
  CHECK(r.tbf.p_value == 1.0);
}

TEST_CASE("clustered violations are caught by the independence test") {
  ViolationSeries s;
  s.tau = 0.05;
  s.hits.assign(250, 0);
  for (int i = 100; i < 105; ++i) s.hits[i] = 1;  // one run of 5
  BacktestReport r = backtest(s);
  CHECK(r.cci.p_value < 0.05);
  CHECK(r.cci.rejected);
}

TEST_CASE("TBF is the POF plus per-gap terms with df = x + 1") {
  ViolationSeries s;
  s.tau = 0.10;
  s.hits.assign(60, 0);
  s.hits[4] = 1;   // gap 5
  s.hits[24] = 1;  // gap 20
  s.hits[25] = 1;  // gap 1
  BacktestReport r = backtest(s);
  double expect = pof_statistic(60, 3, 0.10) + tbf_gap_statistic(5, 0.10) +
                  tbf_gap_statistic(20, 0.10) + tbf_gap_statistic(1, 0.10);
  CHECK(r.tbf.statistic == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.tbf.p_value == doctest::Approx(stats::chi_squared_sf(expect, 4.0)).epsilon(1e-12));

  // a gap of one step: LR_ind(1) = -2 log(tau)
  CHECK(tbf_gap_statistic(1, 0.10) == doctest::Approx(-2.0 * std::log(0.10)).epsilon(1e-12));
}

TEST_CASE("backtest preconditions") {
  ViolationSeries s;
  s.tau = 0.05;
  s.hits = {1};
  CHECK_THROWS_AS(backtest(s), SeriesTooShort);
}

TEST_CASE("all statistics nonnegative, p-values within [0,1]") {
  Rng rng(304);
  for (int rep = 0; rep < 50; ++rep) {
    int t = static_cast<int>(rng.uniform_int(10, 400));
    double tau = rng.uniform(0.02, 0.3);
    ViolationSeries s;
    s.tau = tau;
    s.hits.resize(t);
    for (int i = 0; i < t; ++i) s.hits[i] = rng.uniform() < tau * 1.5 ? 1 : 0;
    BacktestReport r = backtest(s);
    for (const TestResult* res : {&r.hit, &r.pof, &r.cci, &r.tbf}) {
      CHECK(res->statistic >= 0.0);
      CHECK(res->p_value >= 0.0);
      CHECK(res->p_value <= 1.0);
      CHECK(res->rejected == (res->p_value < 0.05));
    }
  }
}

TEST_CASE("chi-squared tail and normal quantile reference values") {
  // frozen reference values (15+ digit accuracy)
  CHECK(stats::chi_squared_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(stats::chi_squared_sf(10.0, 3.0) == doctest::Approx(0.018566135).epsilon(1e-6));
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(stats::normal_quantile(0.05) == doctest::Approx(-1.644853626951473).epsilon(1e-12));
  CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // exact binomial two-sided test sanity: symmetric case
  double p = stats::binomial_test_two_sided(10, 5, 0.5);
  CHECK(p == doctest::Approx(1.0));
  double p2 = stats::binomial_test_two_sided(100, 0, 0.05);
  CHECK(p2 < 0.05);
}
