#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <bergamot/errors.hpp>

namespace bergamot {

// Points are real coordinate vectors (x1, y1, ..., xn, yn); dim = 2n.
using Pt = std::vector<double>;

inline double sqnorm(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

inline double norm(std::span<const double> x) { return std::sqrt(sqnorm(x)); }

inline double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Axis-aligned box given by per-axis min/max.
struct Box {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }

  static Box cube(int dim, double half) {
    Box b;
    b.lo.assign(dim, -half);
    b.hi.assign(dim, half);
    return b;
  }

  bool contains(std::span<const double> p, double slack = 1e-12) const {
    for (int k = 0; k < dim(); ++k)
      if (p[k] < lo[k] - slack || p[k] > hi[k] + slack) return false;
    return true;
  }

  double extent(int k) const { return hi[k] - lo[k]; }

  void validate() const {
    require(!lo.empty() && lo.size() == hi.size(), errc::invalid_argument, "box: empty or ragged");
    for (size_t k = 0; k < lo.size(); ++k)
      require(lo[k] <= hi[k], errc::invalid_argument, "box: lo > hi on axis " + std::to_string(k));
  }
};

// Van der Corput radical inverse; bases fixed per axis for reproducibility.
double halton(unsigned long index, int base);

// Deterministic ball sample: element 0 is the center, then `count` low-discrepancy
// points mapped volume-uniformly onto the closed ball (dim 2 or 4).
std::vector<Pt> ball_sample(std::span<const double> center, double r, int count);

// Deterministic tensor grid of points over a box, per_axis nodes per axis.
std::vector<Pt> grid_points(const Box& box, int per_axis);

std::string format_pt(std::span<const double> p);

}  // namespace bergamot
