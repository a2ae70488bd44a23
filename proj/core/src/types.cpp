#include "fqma/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fqma {

Grid::Grid(int g) {
  if (g < 2) throw InvalidInput("grid needs at least 2 points");
  points.resize(g);
  spacing = 1.0 / (g - 1);
  for (int i = 0; i < g; ++i) points[i] = static_cast<double>(i) / (g - 1);
  points.front() = 0.0;
  points.back() = 1.0;
}

SparseCurve::SparseCurve(std::int64_t id, std::vector<double> t, std::vector<double> v)
    : subject_id(id), times(std::move(t)), values(std::move(v)) {
  if (times.size() != values.size())
    throw InvalidInput("curve times/values length mismatch");
  if (times.empty()) throw InvalidInput("curve needs at least one observation");
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<double> st(times.size()), sv(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    st[i] = times[order[i]];
    sv[i] = values[order[i]];
  }
  times = std::move(st);
  values = std::move(sv);
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw InvalidInput("duplicate observation times in curve " +
                         std::to_string(subject_id));
  for (double t : times) {
    if (!std::isfinite(t) || t < -1e-12 || t > 1.0 + 1e-12)
      throw InvalidInput("curve time outside [0,1]; rescale_curves first");
  }
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidInput("non-finite curve value");
  if (!times.empty()) {
    times.front() = std::max(times.front(), 0.0);
    times.back() = std::min(times.back(), 1.0);
  }
}

DomainMap rescale_curves(std::vector<SparseCurve>& curves, double lo, double hi) {
  if (!(hi > lo)) throw InvalidInput("domain interval must have positive length");
  for (auto& c : curves) {
    for (auto& t : c.times) {
      t = (t - lo) / (hi - lo);
      if (t < -1e-9 || t > 1.0 + 1e-9)
        throw InvalidInput("observation time outside stated domain");
      t = std::clamp(t, 0.0, 1.0);
    }
    for (std::size_t i = 0; i + 1 < c.times.size(); ++i)
      if (!(c.times[i] < c.times[i + 1]))
        throw InvalidInput("duplicate times after rescaling");
  }
  return DomainMap{lo, hi};
}

DomainMap rescale_curves(std::vector<SparseCurve>& curves) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& c : curves)
    for (double t : c.times) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  if (!(hi > lo)) throw InvalidInput("cannot rescale: degenerate time range");
  return rescale_curves(curves, lo, hi);
}

double interp_grid(const Grid& grid, const Eigen::VectorXd& values, double t) {
  const int g = grid.size();
  if (values.size() != g) throw DimensionMismatch("grid/value length mismatch");
  t = std::clamp(t, 0.0, 1.0);
  double pos = t / grid.spacing;
  int i = std::min(static_cast<int>(pos), g - 2);
  double frac = pos - i;
  return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

double interp_surface(const Grid& grid, const Eigen::MatrixXd& surface, double s, double t) {
  const int g = grid.size();
  if (surface.rows() != g || surface.cols() != g)
    throw DimensionMismatch("grid/surface size mismatch");
  s = std::clamp(s, 0.0, 1.0);
  t = std::clamp(t, 0.0, 1.0);
  double ps = s / grid.spacing, pt = t / grid.spacing;
  int i = std::min(static_cast<int>(ps), g - 2);
  int j = std::min(static_cast<int>(pt), g - 2);
  double fs = ps - i, ft = pt - j;
  return surface(i, j) * (1 - fs) * (1 - ft) + surface(i + 1, j) * fs * (1 - ft) +
         surface(i, j + 1) * (1 - fs) * ft + surface(i + 1, j + 1) * fs * ft;
}

}  // namespace fqma
