#include <bergamot/geometry.hpp>

#include <cstdio>

namespace bergamot {

double halton(unsigned long index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Pt ball_point_2d(std::span<const double> c, double r, double u1, double u2) {
  // Area-uniform: radius ~ r*sqrt(u1).
  double rad = r * std::sqrt(u1);
  double th = kTwoPi * u2;
  return {c[0] + rad * std::cos(th), c[1] + rad * std::sin(th)};
}

Pt ball_point_4d(std::span<const double> c, double r, double u1, double u2, double u3, double u4) {
  // Volume-uniform radius ~ r*u1^{1/4}; S^3 via the torus parametrization
  // (cos a e^{i t1}, sin a e^{i t2}) with sin^2 a ~ uniform (surface measure cos a sin a da).
  double rad = r * std::pow(u1, 0.25);
  double sa = std::sqrt(u2), ca = std::sqrt(1.0 - u2);
  double t1 = kTwoPi * u3, t2 = kTwoPi * u4;
  return {c[0] + rad * ca * std::cos(t1), c[1] + rad * ca * std::sin(t1),
          c[2] + rad * sa * std::cos(t2), c[3] + rad * sa * std::sin(t2)};
}

}  // namespace

std::vector<Pt> ball_sample(std::span<const double> center, double r, int count) {
  int d = static_cast<int>(center.size());
  require(d == 2 || d == 4, errc::invalid_argument, "ball_sample: dim must be 2 or 4");
  std::vector<Pt> pts;
  pts.reserve(count + 1);
  pts.emplace_back(center.begin(), center.end());
  for (int i = 1; i <= count; ++i) {
    unsigned long idx = static_cast<unsigned long>(i);
    if (d == 2)
      pts.push_back(ball_point_2d(center, r, halton(idx, 2), halton(idx, 3)));
    else
      pts.push_back(ball_point_4d(center, r, halton(idx, 2), halton(idx, 3), halton(idx, 5),
                                  halton(idx, 7)));
  }
  return pts;
}

std::vector<Pt> grid_points(const Box& box, int per_axis) {
  box.validate();
  require(per_axis >= 1, errc::invalid_argument, "grid_points: per_axis < 1");
  int d = box.dim();
  long total = 1;
  for (int k = 0; k < d; ++k) total *= per_axis;
  std::vector<Pt> pts;
  pts.reserve(total);
  std::vector<int> idx(d, 0);
  for (long t = 0; t < total; ++t) {
    Pt p(d);
    for (int k = 0; k < d; ++k) {
      double frac = per_axis == 1 ? 0.5 : static_cast<double>(idx[k]) / (per_axis - 1);
      p[k] = box.lo[k] + frac * box.extent(k);
    }
    pts.push_back(std::move(p));
    for (int k = 0; k < d; ++k) {
      if (++idx[k] < per_axis) break;
      idx[k] = 0;
    }
  }
  return pts;
}

std::string format_pt(std::span<const double> p) {
  std::string s = "(";
  char buf[40];
  for (size_t i = 0; i < p.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", p[i]);
    s += buf;
    if (i + 1 < p.size()) s += ", ";
  }
  return s + ")";
}

}  // namespace bergamot
