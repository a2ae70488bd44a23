#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fqma/errors.hpp"

namespace fqma {

// Equispaced discretization of the (rescaled) domain [0,1].
struct Grid {
  Grid() : Grid(2) {}
  explicit Grid(int g);

  int size() const { return static_cast<int>(points.size()); }

  std::vector<double> points;  // points[0]=0, points[G-1]=1, strictly increasing
  double spacing;              // 1/(G-1)
};

// One subject's irregularly observed noisy curve.  Times live in [0,1]
// (rescale_curves maps an arbitrary observation interval there); duplicate
// observation times are rejected.
struct SparseCurve {
  SparseCurve() = default;
  SparseCurve(std::int64_t id, std::vector<double> t, std::vector<double> v);

  int n_obs() const { return static_cast<int>(times.size()); }

  std::int64_t subject_id = 0;
  std::vector<double> times;   // sorted strictly increasing, within [0,1]
  std::vector<double> values;
};

// Affinely maps all observation times onto [0,1] using the given interval.
// Records lo/hi so slope functions can be reported back on the original scale.
struct DomainMap {
  double lo = 0.0;
  double hi = 1.0;
  double scale() const { return hi - lo; }
};

DomainMap rescale_curves(std::vector<SparseCurve>& curves);
DomainMap rescale_curves(std::vector<SparseCurve>& curves, double lo, double hi);

// Linear interpolation of a grid-sampled function at t in [0,1].
double interp_grid(const Grid& grid, const Eigen::VectorXd& values, double t);

// Bilinear interpolation of a grid-sampled surface at (s,t) in [0,1]^2.
double interp_surface(const Grid& grid, const Eigen::MatrixXd& surface, double s, double t);

}  // namespace fqma
