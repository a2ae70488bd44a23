#include <doctest.h>

#include "fqma/qr.hpp"
#include "fqma/rng.hpp"
#include "helpers.hpp"

using namespace fqma;
using testutil::subgradient_counts_ok;

TEST_CASE("check loss values") {
  CHECK(check_loss(0.0, 0.5) == 0.0);
  CHECK(check_loss(-2.0, 0.05) == doctest::Approx(1.9));
  CHECK(check_loss(3.0, 0.9) == doctest::Approx(2.7));
}

TEST_CASE("knight identity holds exactly for random triples") {
  Rng rng(101);
  for (int k = 0; k < 1000; ++k) {
    double u = rng.uniform(-5.0, 5.0);
    double v = rng.uniform(-5.0, 5.0);
    double tau = rng.uniform(0.01, 0.99);
    double lhs = check_loss(u - v, tau) - check_loss(u, tau);
    double rhs = -v * psi_tau(u, tau) + testutil::knight_integral(u, v);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("intercept-only median of 1..5") {
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  QuantileFit fit = fit_qr(y, Eigen::MatrixXd(5, 0), 0.5);
  CHECK(fit.j == 0);
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.in_sample_loss == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(subgradient_counts_ok(y, Eigen::MatrixXd(5, 0), fit));
}

TEST_CASE("intercept-only fit of all zeros is perfect") {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(4);
  QuantileFit fit = fit_qr(y, Eigen::MatrixXd(4, 0), 0.25);
  CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fit.in_sample_loss == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fit.perfect_fit);
}

TEST_CASE("exactly linear responses give a zero-loss fit") {
  Rng rng(102);
  for (double tau : {0.1, 0.5, 0.83}) {
    int n = 20;
    Eigen::MatrixXd s(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      s(i, 0) = rng.uniform(-2.0, 2.0);
      y[i] = 0.7 - 1.3 * s(i, 0);
    }
    QuantileFit fit = fit_qr(y, s, tau);
    CHECK(fit.in_sample_loss < 1e-9);
    for (int i = 0; i < n; ++i)
      CHECK(predict(fit, s.row(i).transpose()) == doctest::Approx(y[i]).epsilon(1e-8));
  }
}

TEST_CASE("LP loss matches brute force on tiny instances") {
  Rng rng(103);
  for (int k = 0; k < 300; ++k) {
    auto inst = testutil::random_tiny_instance(rng);
    QuantileFit fit = fit_qr(inst.y, inst.scores, inst.tau);
    double oracle = testutil::brute_force_qr_loss(inst.y, inst.scores, inst.tau);
    CHECK(std::abs(fit.in_sample_loss * inst.y.size() - oracle) < 1e-9);
    CHECK(subgradient_counts_ok(inst.y, inst.scores, fit));
  }
}

TEST_CASE("subgradient counts hold on larger random fits") {
  Rng rng(104);
  for (int k = 0; k < 40; ++k) {
    int n = static_cast<int>(rng.uniform_int(30, 400));
    int j = static_cast<int>(rng.uniform_int(0, 8));
    double tau = rng.uniform(0.02, 0.98);
    Eigen::MatrixXd s(n, j);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < j; ++c) s(i, c) = rng.normal();
      y[i] = rng.normal();
      for (int c = 0; c < j; ++c) y[i] += 0.5 * s(i, c) / (c + 1);
    }
    QuantileFit fit = fit_qr(y, s, tau);
    CHECK(subgradient_counts_ok(y, s, fit));
  }
}

TEST_CASE("in-sample loss is nonincreasing in the truncation level") {
  Rng rng(105);
  int n = 120, jmax = 6;
  Eigen::MatrixXd s(n, jmax);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < jmax; ++c) s(i, c) = rng.normal();
    y[i] = 1.0 + s(i, 0) - 0.4 * s(i, 2) + 0.5 * rng.normal();
  }
  for (double tau : {0.05, 0.5, 0.9}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= jmax; ++j) {
      QuantileFit fit = fit_qr(y, s.leftCols(j), tau);
      CHECK(fit.in_sample_loss <= prev + 1e-10);
      prev = fit.in_sample_loss;
    }
  }
}

TEST_CASE("collinear score columns are flagged and still solved") {
  Rng rng(106);
  int n = 40;
  Eigen::MatrixXd s(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    s(i, 0) = rng.normal();
    s(i, 1) = 2.0 * s(i, 0);  // exactly dependent
    y[i] = s(i, 0) + 0.2 * rng.normal();
  }
  QuantileFit fit = fit_qr(y, s, 0.5);
  CHECK(fit.rank_deficient);
  QuantileFit ref = fit_qr(y, s.leftCols(1), 0.5);
  CHECK(fit.in_sample_loss == doctest::Approx(ref.in_sample_loss).epsilon(1e-9));
}

TEST_CASE("predict is affine in the scores") {
  QuantileFit fit;
  fit.tau = 0.5;
  fit.j = 2;
  fit.intercept = 1.0;
  fit.coefficients = Eigen::Vector2d(2.0, -1.0);
  Eigen::VectorXd s1 = Eigen::Vector2d(3.0, 4.0);
  Eigen::VectorXd s2 = Eigen::Vector2d(-1.0, 0.5);
  CHECK(predict(fit, s1) == doctest::Approx(3.0));
  for (double a : {0.0, 0.25, 0.7, 1.0}) {
    Eigen::VectorXd mix = a * s1 + (1.0 - a) * s2;
    CHECK(predict(fit, mix) ==
          doctest::Approx(a * predict(fit, s1) + (1.0 - a) * predict(fit, s2)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(predict(fit, Eigen::VectorXd::Zero(3)), DimensionMismatch);
}

TEST_CASE("aic and bic arithmetic") {
  QuantileFit fit;
  fit.j = 0;
  fit.in_sample_loss = 1.0;
  CHECK(aic(fit, 100) == doctest::Approx(2.0));
  CHECK(bic(fit, 100) == doctest::Approx(std::log(100.0)));

  QuantileFit bigger = fit;
  bigger.j = 1;
  CHECK(aic(bigger, 100) - aic(fit, 100) == doctest::Approx(2.0));
  CHECK(bic(bigger, 100) - bic(fit, 100) == doctest::Approx(std::log(100.0)));

  QuantileFit perfect = fit;
  perfect.perfect_fit = true;
  CHECK(aic(perfect, 100) == kScoreSentinel);
}

TEST_CASE("FVE selection picks the smallest level reaching the threshold") {
  auto model = testutil::make_sine_model(41, {4.0, 2.0, 1.0, 1.0}, 0.0);
  model.scores = Eigen::MatrixXd::Zero(10, 4);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
  std::vector<int> range{0, 1, 2, 3, 4};
  CHECK(select_j(model, y, 0.5, Criterion::fve(0.75), range).j == 2);
  CHECK(select_j(model, y, 0.5, Criterion::fve(1.0), range).j == 4);

  auto two = testutil::make_sine_model(41, {9.0, 1.0}, 0.0);
  two.scores = Eigen::MatrixXd::Zero(10, 2);
  // boundary case FVE_1 = 0.9 >= 0.9: pin the cumulative ratios exactly, the
  // eigensolver's last ulp must not decide a threshold comparison
  two.eigenvalues = Eigen::Vector2d(9.0, 1.0);
  two.fve_cumulative = Eigen::Vector2d(0.9, 1.0);
  CHECK(select_j(two, y, 0.5, Criterion::fve(0.9), {0, 1, 2}).j == 1);

  auto res = select_j(two, y, 0.5, Criterion::fve(0.99), {0, 1});
  CHECK(res.j == 1);
  CHECK(res.fve_unreachable);
}
