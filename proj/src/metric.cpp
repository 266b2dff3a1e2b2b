#include <bergamot/metric.hpp>

#include <bergamot/quadrature.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace bergamot {

namespace {

void audit_radial_flag(const RadiusField& rho) {
  require(rho.radial(), errc::invalid_argument, "radius field is not radial");
  // Spot check that the full evaluator agrees with the declared profile.
  for (double t : {0.3, 1.1}) {
    Pt p(rho.dim(), 0.0);
    p[0] = t;
    double a = rho(p);
    std::fill(p.begin(), p.end(), 0.0);
    p[1] = t;
    double b = rho(p);
    double c = rho.profile(t);
    require(std::abs(a - c) <= 1e-9 * (1 + c) && std::abs(b - c) <= 1e-9 * (1 + c),
            errc::numerical, "radius field declared radial but profile audit failed");
  }
}

double ray_integral(const RadiusField& rho, double a, double b) {
  if (a > b) std::swap(a, b);
  if (b - a <= 0) return 0;
  return integrate([&](double t) { return 1 / rho.profile(t); }, a, b, 1e-10);
}

}  // namespace

double distance_radial(const RadiusField& rho, std::span<const double> z) {
  audit_radial_flag(rho);
  return ray_integral(rho, 0, norm(z));
}

PairDistance metric_distance(const RadiusField& rho, std::span<const double> x,
                             std::span<const double> y) {
  require(static_cast<int>(x.size()) == rho.dim() && x.size() == y.size(),
          errc::invalid_argument, "metric distance: wrong point dimension");
  double ax = norm(x), ay = norm(y);
  if (rho.radial()) {
    bool same_ray = ax <= 1e-14 || ay <= 1e-14;
    if (!same_ray) {
      double dev = 0;
      for (size_t k = 0; k < x.size(); ++k) {
        double e = x[k] / ax - y[k] / ay;
        dev += e * e;
      }
      same_ray = std::sqrt(dev) <= 1e-9;
    }
    if (same_ray) return {ray_integral(rho, ax, ay), "radial-quadrature"};
  }
  double L = dist(x, y);
  if (L <= 0) return {0, "segment-quadrature"};
  Pt base(x.begin(), x.end()), dir(x.size());
  for (size_t k = 0; k < x.size(); ++k) dir[k] = y[k] - x[k];
  Pt p(x.size());
  double d = integrate(
      [&](double t) {
        for (size_t k = 0; k < p.size(); ++k) p[k] = base[k] + t * dir[k];
        return L / (rho.radial() ? rho.profile(norm(p)) : rho(p));
      },
      0, 1, 1e-8);
  return {d, "segment-quadrature"};
}

long MetricGrid::nodes() const {
  long n = 1;
  for (int s : shape) n *= s;
  return n;
}

long MetricGrid::index_of(std::span<const double> p) const {
  require(box.contains(p, 1e-9), errc::invalid_argument,
          "point outside the grid box: " + format_pt(Pt(p.begin(), p.end())));
  long idx = 0;
  for (size_t k = 0; k < shape.size(); ++k) {
    long i = std::lround((p[k] - box.lo[k]) / h);
    i = std::clamp(i, 0L, static_cast<long>(shape[k]) - 1);
    idx = idx * shape[k] + i;
  }
  return idx;
}

Pt MetricGrid::point_of(long idx) const {
  Pt p(shape.size());
  for (int k = static_cast<int>(shape.size()) - 1; k >= 0; --k) {
    p[k] = box.lo[k] + (idx % shape[k]) * h;
    idx /= shape[k];
  }
  return p;
}

MetricGrid make_metric_grid(const RadiusField& rho, const Box& box, double h) {
  require(h > 0, errc::invalid_argument, "grid spacing must be positive");
  box.validate();
  MetricGrid g;
  g.box = box;
  g.h = h;
  int d = box.dim();
  long total = 1;
  for (int k = 0; k < d; ++k) {
    long n = std::lround(box.extent(k) / h) + 1;
    require(std::abs((n - 1) * h - box.extent(k)) <= 1e-9 * std::max(1.0, box.extent(k)),
            errc::invalid_argument, "box extent must be a multiple of h");
    g.shape.push_back(static_cast<int>(n));
    total *= n;
    require(total <= 20'000'000, errc::invalid_argument, "grid exceeds the 2e7 node cap");
  }
  g.inv_rho.resize(total);
  g.rho_min = std::numeric_limits<double>::infinity();
  for (long i = 0; i < total; ++i) {
    double r = rho(g.point_of(i));
    g.inv_rho[i] = 1 / r;
    g.rho_min = std::min(g.rho_min, r);
  }
  require(h <= g.rho_min / 4 * (1 + 1e-12), errc::invalid_argument,
          "h too coarse for the radius field (need h <= min rho / 4)");
  return g;
}

long DistanceField::index_of(std::span<const double> p) const {
  require(box.contains(p, 1e-9), errc::invalid_argument,
          "point outside the grid box: " + format_pt(Pt(p.begin(), p.end())));
  long idx = 0;
  for (size_t k = 0; k < shape.size(); ++k) {
    long i = std::lround((p[k] - box.lo[k]) / h);
    i = std::clamp(i, 0L, static_cast<long>(shape[k]) - 1);
    idx = idx * shape[k] + i;
  }
  return idx;
}

double DistanceField::at(std::span<const double> p) const { return d[index_of(p)]; }

DistanceField distance_grid(const MetricGrid& g, std::span<const double> source) {
  int d = static_cast<int>(g.shape.size());
  long total = g.nodes();
  long src = g.index_of(source);

  std::vector<std::array<int, 4>> offs;
  std::vector<double> lens;
  std::vector<int> cursor(d, -1);
  for (bool more = true; more;) {
    double s = 0;
    for (int k = 0; k < d; ++k) s += cursor[k] * cursor[k];
    if (s > 0) {
      std::array<int, 4> o{0, 0, 0, 0};
      for (int k = 0; k < d; ++k) o[k] = cursor[k];
      offs.push_back(o);
      lens.push_back(g.h * std::sqrt(s));
    }
    more = false;
    for (int k = 0; k < d; ++k) {
      if (++cursor[k] <= 1) {
        more = true;
        break;
      }
      cursor[k] = -1;
    }
  }

  std::vector<long> stride(d);
  stride[d - 1] = 1;
  for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * g.shape[k + 1];

  DistanceField df;
  df.box = g.box;
  df.h = g.h;
  df.shape = g.shape;
  df.source = g.point_of(src);
  df.d.assign(total, std::numeric_limits<double>::infinity());
  df.d[src] = 0;

  using Item = std::pair<double, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.push({0, src});
  std::vector<long> coord(d);
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > df.d[u]) continue;
    long rem = u;
    for (int k = 0; k < d; ++k) {
      coord[k] = rem / stride[k];
      rem %= stride[k];
    }
    for (size_t e = 0; e < offs.size(); ++e) {
      long v = u;
      bool in = true;
      for (int k = 0; k < d; ++k) {
        long c = coord[k] + offs[e][k];
        if (c < 0 || c >= g.shape[k]) {
          in = false;
          break;
        }
        v += offs[e][k] * stride[k];
      }
      if (!in) continue;
      double w = lens[e] * 0.5 * (g.inv_rho[u] + g.inv_rho[v]);
      if (du + w < df.d[v]) {
        df.d[v] = du + w;
        pq.push({du + w, v});
      }
    }
  }
  return df;
}

SandwichReport ball_sandwich_audit(const MetricGrid& g, const DistanceField& df,
                                   const RadiusField& rho, std::span<const double> x, double r,
                                   double c_hat) {
  require(c_hat >= 1, errc::invalid_argument, "sandwich audit: C_hat must be >= 1");
  SandwichReport rep;
  double rx = rho(x);
  double dst = stencil_distortion(g.box.dim());
  double tol_metric = (dst - 1) * c_hat * r + g.h / g.rho_min;
  double tol_euclid = g.h * std::sqrt(static_cast<double>(g.box.dim()));
  long total = g.nodes();
  for (long i = 0; i < total; ++i) {
    Pt w = g.point_of(i);
    double de = dist(w, x);
    double dd = df.d[i];
    if (de <= r * rx) {
      ++rep.outer_checked;
      double excess = dd - (c_hat * r + tol_metric);
      if (excess > 0) {
        ++rep.outer_violations;
        rep.worst_outer = std::max(rep.worst_outer, excess);
      }
    }
    if (dd <= r / c_hat) {
      ++rep.inner_checked;
      double excess = de - (r * rx + tol_euclid);
      if (excess > 0) {
        ++rep.inner_violations;
        rep.worst_inner = std::max(rep.worst_inner, excess);
      }
    }
  }
  return rep;
}

LipschitzReport lipschitz_audit(const MetricGrid& g, const DistanceField& df,
                                const RadiusField& rho) {
  int d = static_cast<int>(g.shape.size());
  std::vector<long> stride(d);
  stride[d - 1] = 1;
  for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * g.shape[k + 1];

  // Positive-direction offsets only (each undirected edge once).
  std::vector<std::array<int, 4>> offs;
  std::vector<double> lens;
  std::vector<int> cursor(d, -1);
  for (bool more = true; more;) {
    int first_nz = 0;
    double s = 0;
    for (int k = 0; k < d; ++k) {
      if (cursor[k] != 0 && first_nz == 0) first_nz = cursor[k];
      s += cursor[k] * cursor[k];
    }
    if (first_nz > 0) {
      std::array<int, 4> o{0, 0, 0, 0};
      for (int k = 0; k < d; ++k) o[k] = cursor[k];
      offs.push_back(o);
      lens.push_back(g.h * std::sqrt(s));
    }
    more = false;
    for (int k = 0; k < d; ++k) {
      if (++cursor[k] <= 1) {
        more = true;
        break;
      }
      cursor[k] = -1;
    }
  }

  LipschitzReport rep;
  long total = g.nodes();
  std::vector<long> coord(d);
  Pt mid(d);
  for (long u = 0; u < total; ++u) {
    long rem = u;
    for (int k = 0; k < d; ++k) {
      coord[k] = rem / stride[k];
      rem %= stride[k];
    }
    Pt pu = g.point_of(u);
    for (size_t e = 0; e < offs.size(); ++e) {
      long v = u;
      bool in = true;
      for (int k = 0; k < d; ++k) {
        long c = coord[k] + offs[e][k];
        if (c < 0 || c >= g.shape[k]) {
          in = false;
          break;
        }
        v += offs[e][k] * stride[k];
      }
      if (!in) continue;
      for (int k = 0; k < d; ++k) mid[k] = pu[k] + 0.5 * offs[e][k] * g.h;
      double prod = std::abs(df.d[u] - df.d[v]) / lens[e] * rho(mid);
      if (prod > rep.max_product) {
        rep.max_product = prod;
        rep.arg_mid = mid;
      }
    }
  }
  return rep;
}

}  // namespace bergamot
