#include <bergamot/verify.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include <bergamot/errors.hpp>

namespace bergamot {

namespace {

// 8 unit ray directions: the plane uses the eighth roots of unity, real dimension four
// uses the signed coordinate axes.
std::vector<Pt> ray_directions(int dim) {
  std::vector<Pt> dirs;
  if (dim == 2) {
    const double s = std::sqrt(0.5);
    const double table[8][2] = {{1, 0}, {s, s}, {0, 1}, {-s, s},
                                {-1, 0}, {-s, -s}, {0, -1}, {s, -s}};
    for (auto& row : table) dirs.push_back({row[0], row[1]});
    return dirs;
  }
  for (int l = 0; l < 8; ++l) {
    Pt u(static_cast<size_t>(dim), 0.0);
    u[l % dim] = l < dim ? 1.0 : -1.0;
    dirs.push_back(std::move(u));
  }
  return dirs;
}

Pt step_from(const Pt& z, const Pt& u, double len) {
  Pt w = z;
  for (size_t k = 0; k < w.size(); ++k) w[k] += len * u[k];
  return w;
}

struct LineFit {
  double slope = 0, intercept = 0;
};

LineFit lsq(const std::vector<std::pair<double, double>>& pts, const char* degenerate_msg) {
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  require(den > 1e-12 * std::max(1.0, sxx), errc::numerical, degenerate_msg);
  LineFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace

KappaField make_kappa_field(const KappaSpec& spec, const RadiusField& rho) {
  KappaField kf;
  switch (spec.mode) {
    case KappaMode::rho:
      kf.raw = rho;
      kf.eff = rho;
      break;
    case KappaMode::scaled:
      require(spec.scale > 0, errc::invalid_argument, "kappa scale factor must be positive");
      kf.raw = RadiusField::scaled(rho, spec.scale);
      if (spec.scale < 1) {
        kf.eff = rho;  // max(c rho, rho) with c < 1
        kf.substituted_everywhere = true;
      } else {
        kf.eff = kf.raw;
      }
      break;
    case KappaMode::table:
      kf.raw = RadiusField::from_profile_table(rho.dim(), spec.t, spec.v);
      kf.eff = RadiusField::max_of(kf.raw, rho);
      break;
  }
  return kf;
}

std::vector<std::pair<Pt, Pt>> default_pairs(const RadiusField& rho, int n, double d_hi) {
  require(n >= 1 && rho.dim() == 2 * n, errc::invalid_argument,
          "radius field dimension does not match n");
  require(d_hi > 0, errc::invalid_argument, "d_hi must be positive");
  const int dim = rho.dim();
  const double anchors[5] = {0, 0.5, 1, 1.5, 2};

  std::vector<std::pair<Pt, Pt>> pairs;
  for (double a : anchors) {
    Pt z(static_cast<size_t>(dim), 0.0);
    z[0] = a;
    pairs.emplace_back(z, z);
  }
  const auto dirs = ray_directions(dim);
  for (double a : anchors) {
    Pt z(static_cast<size_t>(dim), 0.0);
    z[0] = a;
    for (const Pt& u : dirs) {
      for (int t = 0; t < 8; ++t) {
        const double target = d_hi * (t + 1) / 8.0;
        double hi = 0.25;
        int guard = 0;
        while (metric_distance(rho, z, step_from(z, u, hi)).d < target) {
          hi *= 2;
          require(++guard < 60, errc::numerical,
                  "pair sampler cannot reach the target distance along a ray");
        }
        double lo = 0;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (metric_distance(rho, z, step_from(z, u, mid)).d < target ? lo : hi) = mid;
        }
        pairs.emplace_back(z, step_from(z, u, lo));
      }
    }
  }
  return pairs;
}

BoundReport verify_bound(const KernelModel& model, const RadiusField& rho,
                         const KappaSpec& kappa, const std::vector<std::pair<Pt, Pt>>& pairs,
                         double d_lo, double d_hi, double eps_min, double log_margin) {
  require(0 <= d_lo && d_lo < d_hi, errc::invalid_argument, "fit window must satisfy 0 <= d_lo < d_hi");
  require(eps_min > 0, errc::invalid_argument, "eps_min must be positive");
  require(log_margin > 0, errc::invalid_argument, "log margin must be positive");
  require(rho.dim() == 2 * model.n(), errc::invalid_argument,
          "radius field dimension does not match the kernel model");

  const Weight& w = model.weight();
  const int n = model.n();
  const KappaField kf = make_kappa_field(kappa, rho);

  BoundReport rep;
  rep.d_lo = d_lo;
  rep.d_hi = d_hi;
  rep.eps_min = eps_min;
  rep.log_margin = log_margin;
  rep.kappa_substituted = kf.substituted_everywhere;

  rep.rows.reserve(pairs.size());
  for (const auto& [z, zw] : pairs) {
    PairRow row;
    row.z = z;
    row.w = zw;
    const KernelValue kv = eval_kernel(model, z, zw);
    row.abs_k = std::abs(kv.K);
    row.tail = kv.tail;
    row.tail_flag = kv.tail_flag;
    row.phi_z = w.phi(z);
    row.phi_w = w.phi(zw);
    row.rho_z = rho(z);
    row.rho_w = rho(zw);
    row.kappa_z = kf.eff(z);
    if (kf.raw(z) < row.rho_z * (1 - 1e-12)) rep.kappa_substituted = true;
    const PairDistance pd = metric_distance(rho, z, zw);
    row.d = pd.d;
    row.method = pd.method;
    row.log_q = (row.abs_k > 0 ? std::log(row.abs_k) : -HUGE_VAL) - row.phi_z - row.phi_w +
                n * std::log(row.rho_z * row.rho_w) + std::log(row.rho_z / row.kappa_z);
    row.q = std::exp(row.log_q);
    rep.rows.push_back(std::move(row));
  }

  // Window rows: tail flags are an error (the model does not cover the window), Q
  // underflow only drops the row from the fit.
  std::vector<const PairRow*> fit_rows;
  for (const PairRow& row : rep.rows) {
    if (row.d < d_lo || row.d > d_hi) continue;
    require(!row.tail_flag, errc::numerical,
            "tail-flagged kernel values inside the fit window; raise the kernel degree");
    if (row.q < 1e-300) continue;
    fit_rows.push_back(&row);
  }
  rep.window_pairs = static_cast<int>(fit_rows.size());
  require(rep.window_pairs >= 8, errc::numerical, "fewer than 8 pairs in the fit window");

  // Upper envelope: per-distance-bin maximum of log Q, then least squares on the bin
  // maxima. Fitting the envelope rather than the pooled cloud keeps the verdict about
  // the claimed upper bound; the scatter below the envelope carries no information
  // against it.
  constexpr int bins = 10;
  const double bw = (d_hi - d_lo) / bins;
  std::map<int, const PairRow*> envelope;
  for (const PairRow* row : fit_rows) {
    const int b = std::min(bins - 1, static_cast<int>((row->d - d_lo) / bw));
    auto [it, fresh] = envelope.try_emplace(b, row);
    if (!fresh && row->log_q > it->second->log_q) it->second = row;
  }
  std::vector<std::pair<double, double>> env_pts;
  env_pts.reserve(envelope.size());
  for (auto& [b, row] : envelope) env_pts.emplace_back(row->d, row->log_q);
  require(env_pts.size() >= 2, errc::numerical, "fit window collapses to a single distance bin");

  const LineFit fit = lsq(env_pts, "fit window collapses to a single distance bin");
  rep.slope = fit.slope;
  rep.eps_hat = -fit.slope;
  rep.log_c_hat = fit.intercept;
  double max_resid = -HUGE_VAL;
  for (const PairRow* row : fit_rows)
    max_resid = std::max(max_resid, row->log_q - (fit.intercept + fit.slope * row->d));
  rep.max_resid = max_resid;
  rep.pass = rep.slope <= -eps_min && rep.max_resid <= log_margin;
  return rep;
}

HypothesisReport hypothesis_gate(const Weight& w) {
  return hypothesis_scan(w, ProbeOptions::defaults(w.n()));
}

DecayReport decay_report(const std::vector<double>& profile_d,
                         const std::vector<double>& profile_log_v, double r0) {
  require(profile_d.size() == profile_log_v.size(), errc::invalid_argument,
          "profile arrays must have equal length");
  const double floor_log = std::log(1e-14);
  DecayReport rep;
  rep.r0 = r0;
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < profile_d.size(); ++i) {
    if (profile_d[i] < r0 || profile_log_v[i] < floor_log) continue;
    pts.emplace_back(profile_d[i], profile_log_v[i]);
    rep.d.push_back(profile_d[i]);
    rep.log_v.push_back(profile_log_v[i]);
  }
  require(pts.size() >= 4, errc::numerical, "too few usable profile points beyond r0");
  const LineFit fit = lsq(pts, "profile points collapse to a single distance");
  rep.eps_hat = -fit.slope;
  rep.intercept = fit.intercept;
  double max_resid = -HUGE_VAL;
  for (auto& [x, y] : pts) max_resid = std::max(max_resid, y - (fit.intercept + fit.slope * x));
  rep.max_resid = max_resid;
  rep.used = static_cast<int>(pts.size());
  return rep;
}

}  // namespace bergamot
