#include <doctest.h>

#include "fqma/fpca.hpp"
#include "fqma/rng.hpp"

using namespace fqma;

namespace {

std::vector<SparseCurve> curves_from_function(int n, int obs_per_curve, double (*f)(double),
                                              Rng& rng) {
  std::vector<SparseCurve> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> t, v;
    for (int l = 0; l < obs_per_curve; ++l) t.push_back(rng.uniform());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    for (double tt : t) v.push_back(f(tt));
    out.emplace_back(i, t, v);
  }
  return out;
}

}  // namespace

TEST_CASE("smoothing zero curves gives the zero function") {
  Rng rng(11);
  auto curves = curves_from_function(30, 8, [](double) { return 0.0; }, rng);
  Grid grid(31);
  auto mu = smooth_mean(curves, grid, 0.15);
  CHECK(mu.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("local linear smoothing reproduces constants exactly") {
  Rng rng(12);
  auto curves = curves_from_function(20, 6, [](double) { return 3.25; }, rng);
  Grid grid(41);
  auto mu = smooth_mean(curves, grid, std::nullopt);
  for (int g = 0; g < grid.size(); ++g) CHECK(mu[g] == doctest::Approx(3.25).epsilon(1e-9));
}

TEST_CASE("local linear smoothing reproduces affine functions within 1e-8") {
  Rng rng(13);
  auto curves = curves_from_function(25, 9, [](double t) { return 2.0 - 1.5 * t; }, rng);
  Grid grid(51);
  auto mu = smooth_mean(curves, grid, 0.2);
  for (int g = 0; g < grid.size(); ++g)
    CHECK(mu[g] == doctest::Approx(2.0 - 1.5 * grid.points[g]).epsilon(1e-8));
}

TEST_CASE("mean smoothing requires 10 pooled observations") {
  std::vector<SparseCurve> curves{SparseCurve(0, {0.1, 0.5, 0.9}, {1.0, 1.0, 1.0})};
  CHECK_THROWS_AS(smooth_mean(curves, Grid(11), 0.2), DegenerateDesign);
}

TEST_CASE("degenerate design: all mass at one time point") {
  // every pooled observation at the same t; the local line is never determined
  std::vector<SparseCurve> curves;
  for (int i = 0; i < 12; ++i) curves.emplace_back(i, std::vector<double>{0.5},
                                                   std::vector<double>{1.0 * i});
  CHECK_THROWS_AS(smooth_mean(curves, Grid(11), 0.05), DegenerateDesign);
}

TEST_CASE("bandwidth candidates are log-spaced within [2 spacing, 0.5]") {
  auto bws = bandwidth_candidates(1.0 / 50);
  REQUIRE(bws.size() == 10);
  CHECK(bws.front() == doctest::Approx(0.04));
  CHECK(bws.back() == doctest::Approx(0.5));
  for (std::size_t i = 1; i < bws.size(); ++i) {
    CHECK(bws[i] > bws[i - 1]);
    CHECK(bws[i] / bws[i - 1] ==
          doctest::Approx(bws[1] / bws[0]).epsilon(1e-9));  // geometric
  }
}

TEST_CASE("identical curves produce zero noise variance") {
  // every subject follows the same gently curved function, observed without
  // error at its own time points
  Rng rng(14);
  std::vector<SparseCurve> curves;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> t, v;
    for (int l = 0; l < 12; ++l) t.push_back(rng.uniform());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    for (double tt : t) v.push_back(1.0 + tt + 0.3 * tt * tt);
    curves.emplace_back(i, t, v);
  }
  Grid grid(51);
  auto mu = smooth_mean(curves, grid, std::nullopt);
  auto [cov, sigma2] = smooth_covariance(curves, mu, grid, std::nullopt);
  CHECK(sigma2 < 1e-6);
  CHECK(sigma2 >= 0.0);
}

TEST_CASE("covariance smoothing needs repeated observations") {
  std::vector<SparseCurve> curves;
  for (int i = 0; i < 10; ++i)
    curves.emplace_back(i, std::vector<double>{0.1 * i + 0.05}, std::vector<double>{1.0});
  Grid grid(11);
  auto mu = smooth_mean(curves, grid, 0.3);
  CHECK_THROWS_AS(smooth_covariance(curves, mu, grid, 0.3), DegenerateDesign);
}
