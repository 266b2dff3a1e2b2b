#include <bergamot/radius.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace bergamot {

namespace {

double bisect_radius(const std::function<double(double)>& sup_at, const BisectOptions& o) {
  auto f = [&](double r) { return r * r * sup_at(r); };
  require(f(o.rmin) < 1, errc::numerical, "radius bisection: potential too singular at rmin");
  require(f(o.rmax) > 1, errc::numerical,
          "radius bisection: potential too small on reachable scales");
  double lo = o.rmin, hi = o.rmax;
  while (hi - lo > o.reltol * lo) {
    double mid = 0.5 * (lo + hi);
    (f(mid) <= 1 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

std::string provenance_name(RadiusProvenance p) {
  switch (p) {
    case RadiusProvenance::from_potential: return "from-potential";
    case RadiusProvenance::constant: return "constant";
    case RadiusProvenance::scaled: return "scaled";
    case RadiusProvenance::max_of_two: return "max-of-two";
    case RadiusProvenance::table: return "table";
  }
  return "?";
}

double RadiusField::operator()(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == dim_, errc::invalid_argument,
          "radius field: wrong point dimension");
  double r = eval_(x);
  require(std::isfinite(r) && r > 0, errc::numerical,
          "radius field: non-positive value at " + format_pt(Pt(x.begin(), x.end())));
  return r;
}

double RadiusField::profile(double t) const {
  require(radial_, errc::invalid_argument, "radius field: no radial profile");
  return prof_(t);
}

RadiusField RadiusField::from_potential(const Potential& V, BisectOptions opts) {
  RadiusField f;
  f.dim_ = V.dim;
  f.prov_ = RadiusProvenance::from_potential;
  f.eval_ = [V, opts](std::span<const double> x) {
    Pt p(x.begin(), x.end());
    return bisect_radius([&](double r) { return V.sup_ball(p, r); }, opts);
  };
  if (V.exact_radial) {
    f.radial_ = true;
    f.prof_ = [V, opts](double t) {
      return bisect_radius([&](double r) { return V.profile(t + r); }, opts);
    };
  }
  return f;
}

RadiusField RadiusField::constant(int dim, double value) {
  require(value > 0, errc::invalid_argument, "constant radius field: value must be positive");
  RadiusField f;
  f.dim_ = dim;
  f.prov_ = RadiusProvenance::constant;
  f.eval_ = [value](std::span<const double>) { return value; };
  f.radial_ = true;
  f.prof_ = [value](double) { return value; };
  return f;
}

RadiusField RadiusField::scaled(const RadiusField& base, double factor) {
  require(factor > 0, errc::invalid_argument, "scaled radius field: factor must be positive");
  RadiusField f = base;
  f.prov_ = RadiusProvenance::scaled;
  auto inner = base.eval_;
  f.eval_ = [inner, factor](std::span<const double> x) { return factor * inner(x); };
  if (base.radial_) {
    auto iprof = base.prof_;
    f.prof_ = [iprof, factor](double t) { return factor * iprof(t); };
  }
  return f;
}

RadiusField RadiusField::max_of(const RadiusField& a, const RadiusField& b) {
  require(a.dim_ == b.dim_, errc::invalid_argument, "max radius field: dimension mismatch");
  RadiusField f;
  f.dim_ = a.dim_;
  f.prov_ = RadiusProvenance::max_of_two;
  auto ea = a.eval_, eb = b.eval_;
  f.eval_ = [ea, eb](std::span<const double> x) { return std::max(ea(x), eb(x)); };
  if (a.radial_ && b.radial_) {
    f.radial_ = true;
    auto pa = a.prof_, pb = b.prof_;
    f.prof_ = [pa, pb](double t) { return std::max(pa(t), pb(t)); };
  }
  return f;
}

RadiusField RadiusField::from_profile_table(int dim, std::vector<double> t,
                                            std::vector<double> v) {
  require(!t.empty() && t.size() == v.size(), errc::invalid_argument,
          "radius table: need matching nonempty abscissa/value lists");
  require(std::is_sorted(t.begin(), t.end()), errc::invalid_argument,
          "radius table: abscissae must be sorted");
  for (double x : v)
    require(x > 0 && std::isfinite(x), errc::invalid_argument,
            "radius table: values must be positive and finite");
  auto prof = [t = std::move(t), v = std::move(v)](double s) {
    if (s <= t.front()) return v.front();
    if (s >= t.back()) return v.back();
    auto it = std::upper_bound(t.begin(), t.end(), s);
    size_t i = it - t.begin();
    double u = (s - t[i - 1]) / (t[i] - t[i - 1]);
    return v[i - 1] + u * (v[i] - v[i - 1]);
  };
  RadiusField f;
  f.dim_ = dim;
  f.prov_ = RadiusProvenance::table;
  f.radial_ = true;
  f.prof_ = prof;
  f.eval_ = [prof](std::span<const double> x) { return prof(norm(x)); };
  return f;
}

AxiomScan radius_axiom_constant(const RadiusField& rho,
                                const std::vector<std::pair<Pt, Pt>>& pairs) {
  require(!pairs.empty(), errc::invalid_argument, "radius axiom scan: empty pair set");
  AxiomScan s;
  s.witness = pairs.front();
  for (const auto& [x, y] : pairs) {
    double rx = rho(x);
    require(dist(x, y) <= rx * (1 + 1e-9), errc::invalid_argument,
            "radius axiom scan: pair not inside B(x, rho(x))");
    double ry = rho(y);
    double q = std::max(rx / ry, ry / rx);
    if (q > s.c_hat) {
      s.c_hat = q;
      s.witness = {x, y};
    }
  }
  return s;
}

std::vector<std::pair<Pt, Pt>> sample_axiom_pairs(const RadiusField& rho, const Box& box,
                                                  int centers_per_axis) {
  std::vector<std::pair<Pt, Pt>> pairs;
  for (const Pt& x : grid_points(box, centers_per_axis)) {
    double r = rho(x) * 0.999;
    std::vector<Pt> pts = ball_sample(x, r, 9);  // element 0 is the center itself
    for (size_t i = 1; i < pts.size(); ++i) pairs.emplace_back(x, pts[i]);
  }
  return pairs;
}

SandwichAudit pot_rsquared_audit(const Potential& V, const RadiusField& rho,
                                 const std::vector<Pt>& probes, double D_hat) {
  require(!probes.empty(), errc::invalid_argument, "sandwich audit: empty probe set");
  require(D_hat >= 1, errc::invalid_argument, "sandwich audit: D_hat must be >= 1");
  SandwichAudit a;
  a.min_lower = std::numeric_limits<double>::infinity();
  for (const Pt& x : probes) {
    double r = rho(x);
    double f = r * r * V.sup_ball(x, r);
    ++a.audited;
    if (f > a.max_upper) {
      a.max_upper = f;
      a.arg_upper = x;
    }
    if (4 * D_hat * f < a.min_lower) {
      a.min_lower = 4 * D_hat * f;
      a.arg_lower = x;
    }
  }
  a.pass = a.max_upper <= 1 + 1e-9 && a.min_lower >= 1 - 1e-6;
  return a;
}

PotToRadFit pot_to_rad_fit(const RadiusField& rho,
                           const std::vector<std::pair<Pt, Pt>>& pairs) {
  require(!pairs.empty(), errc::invalid_argument, "pot-to-rad fit: empty pair set");
  PotToRadFit best;
  best.C = std::numeric_limits<double>::infinity();
  for (int M = 1; M <= 3; ++M) {
    double C = 1;
    std::pair<Pt, Pt> wit = pairs.front();
    for (const auto& [x, y] : pairs) {
      double rx = rho(x), ry = rho(y);
      double m = std::max(dist(x, y) / rx, 1.0);
      double mM = std::pow(m, M);
      double ratio = ry / rx;
      double need = std::max(ratio / mM, 1 / (ratio * mM));
      if (need > C) {
        C = need;
        wit = {x, y};
      }
    }
    if (M == 1 || C < best.C) {
      best.C = C;
      best.M = M;
      best.witness = wit;
    }
    if (C <= 8) break;  // moderate constant reached; prefer the smaller exponent
  }
  return best;
}

AdmBoundedAudit adm_bounded_audit(const RadiusField& rho, double c, double c_inf,
                                  const std::vector<Pt>& probes) {
  require(c > 0 && c_inf > 0, errc::invalid_argument,
          "adm-bounded audit: requires positive c and admissibility infimum");
  AdmBoundedAudit a;
  a.bound = std::max(c, 1 / std::sqrt(c_inf));
  for (const Pt& x : probes) {
    double r = rho(x);
    if (r > a.max_rho) {
      a.max_rho = r;
      a.arg_max = x;
    }
  }
  a.pass = a.max_rho <= a.bound * (1 + 1e-9);
  return a;
}

Covering build_covering(const RadiusField& rho, const Box& box, double c_hat) {
  require(c_hat >= 1, errc::invalid_argument, "covering: C_hat must be >= 1");
  Covering cov;
  cov.domain = box;
  cov.shrink = 1 / (1 + c_hat * c_hat);
  int d = box.dim();

  // Pass 1: bound rho on a coarse audit grid to size the candidate grid.
  double rho_min = std::numeric_limits<double>::infinity(), rho_max = 0;
  for (const Pt& x : grid_points(box, 17)) {
    double r = rho(x);
    rho_min = std::min(rho_min, r);
    rho_max = std::max(rho_max, r);
  }
  require(rho_min > 1e-8, errc::numerical, "covering: radius field vanishes on the box");
  cov.rho_min = rho_min;

  double spacing = rho_min / 4;
  std::vector<int> counts(d);
  long total = 1;
  for (int k = 0; k < d; ++k) {
    counts[k] = std::max(1, static_cast<int>(std::floor(box.extent(k) / spacing)) + 1);
    total *= counts[k];
    require(total <= 4'000'000, errc::invalid_argument, "covering: candidate grid too large");
  }

  // Greedy scan in row-major order; spatial hash over accepted shrunken balls.
  double cell = std::max(2 * rho_max * cov.shrink, spacing);
  auto cell_key = [&](const Pt& p) {
    long long key = 0;
    for (int k = 0; k < d; ++k)
      key = key * 73856093LL + static_cast<long long>(std::floor(p[k] / cell));
    return key;
  };
  std::unordered_map<long long, std::vector<int>> buckets;
  double max_shrunk = 0;

  std::vector<int> idx(d, 0);
  Pt p(d);
  for (long flat = 0; flat < total; ++flat) {
    for (int k = 0; k < d; ++k)
      p[k] = counts[k] == 1 ? 0.5 * (box.lo[k] + box.hi[k])
                            : box.lo[k] + box.extent(k) * idx[k] / (counts[k] - 1);
    double r = rho(p);
    cov.rho_min = std::min(cov.rho_min, r);
    double rs = r * cov.shrink;
    bool ok = true;
    int ring = static_cast<int>(std::ceil((rs + max_shrunk) / cell)) + 1;
    std::vector<int> nb(d, -ring);
    Pt q(d);
    for (bool more = true; more && ok;) {
      for (int k = 0; k < d; ++k) q[k] = p[k] + nb[k] * cell;
      auto it = buckets.find(cell_key(q));
      if (it != buckets.end()) {
        for (int j : it->second) {
          if (dist(p, cov.centers[j]) < rs + cov.radii[j] * cov.shrink) {
            ok = false;
            break;
          }
        }
      }
      more = false;
      for (int k = 0; k < d; ++k) {
        if (++nb[k] <= ring) {
          more = true;
          break;
        }
        nb[k] = -ring;
      }
    }
    if (ok) {
      cov.centers.push_back(p);
      cov.radii.push_back(r);
      buckets[cell_key(p)].push_back(static_cast<int>(cov.centers.size()) - 1);
      max_shrunk = std::max(max_shrunk, rs);
    }
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < counts[k]) break;
      idx[k] = 0;
    }
  }

  // Coverage and overlap audit on an independent grid at spacing ~rho_min.
  // Full balls are hashed into every cell they touch so each audit point tests
  // only nearby centers.
  double rmax_full = cov.radii.empty() ? 1 : *std::max_element(cov.radii.begin(), cov.radii.end());
  double acell = rmax_full;
  std::unordered_map<long long, std::vector<int>> ball_cells;
  auto acell_key = [&](const std::vector<long long>& c) {
    long long key = 0;
    for (int k = 0; k < d; ++k) key = key * 73856093LL + c[k];
    return key;
  };
  std::vector<long long> clo(d), chi(d), cc(d);
  for (size_t j = 0; j < cov.centers.size(); ++j) {
    for (int k = 0; k < d; ++k) {
      clo[k] = static_cast<long long>(std::floor((cov.centers[j][k] - cov.radii[j]) / acell));
      chi[k] = static_cast<long long>(std::floor((cov.centers[j][k] + cov.radii[j]) / acell));
    }
    cc = clo;
    for (bool more = true; more;) {
      ball_cells[acell_key(cc)].push_back(static_cast<int>(j));
      more = false;
      for (int k = 0; k < d; ++k) {
        if (++cc[k] <= chi[k]) {
          more = true;
          break;
        }
        cc[k] = clo[k];
      }
    }
  }
  int audit_per_axis = 1;
  for (int k = 0; k < d; ++k)
    audit_per_axis = std::max(
        audit_per_axis,
        std::min(161, static_cast<int>(std::ceil(box.extent(k) / cov.rho_min)) + 1));
  cov.covers_all = true;
  for (const Pt& x : grid_points(box, audit_per_axis)) {
    ++cov.audit_points;
    int mult = 0;
    for (int k = 0; k < d; ++k) cc[k] = static_cast<long long>(std::floor(x[k] / acell));
    auto it = ball_cells.find(acell_key(cc));
    if (it != ball_cells.end())
      for (int j : it->second)
        if (dist(x, cov.centers[j]) <= cov.radii[j]) ++mult;
    if (mult == 0 && cov.covers_all) {
      cov.covers_all = false;
      cov.uncovered_witness = x;
    }
    cov.overlap_K = std::max(cov.overlap_K, mult);
  }
  return cov;
}

}  // namespace bergamot
