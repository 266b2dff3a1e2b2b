#include <bergamot/weight.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include <bergamot/quadrature.hpp>

namespace bergamot {

namespace {

double ipow(double x, int e) {
  double r = 1;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

long binom(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

Family family_from_name(const std::string& name) {
  if (name == "fock") return Family::fock;
  if (name == "radial_power") return Family::radial_power;
  if (name == "gamma_monomials") return Family::gamma_monomials;
  if (name == "decoupled") return Family::decoupled;
  if (name == "custom_radial") return Family::custom_radial;
  fail(errc::invalid_argument, "unknown weight family: " + name);
}

std::string family_name(Family f) {
  switch (f) {
    case Family::fock: return "fock";
    case Family::radial_power: return "radial_power";
    case Family::gamma_monomials: return "gamma_monomials";
    case Family::decoupled: return "decoupled";
    case Family::custom_radial: return "custom_radial";
  }
  return "?";
}

double SPoly::eval(const double* s) const {
  double r = 0;
  for (const Term& t : terms) {
    double v = t.c;
    for (int j = 0; j < nvars; ++j) v *= ipow(s[j], t.e[j]);
    r += v;
  }
  return r;
}

SPoly SPoly::deriv(int j) const {
  SPoly d;
  d.nvars = nvars;
  for (const Term& t : terms) {
    if (t.e[j] == 0) continue;
    Term u = t;
    u.c = t.c * t.e[j];
    u.e[j] = t.e[j] - 1;
    d.terms.push_back(u);
  }
  return d;
}

double Potential::sup_ball(std::span<const double> center, double r) const {
  require(r > 0, errc::invalid_argument, "sup_ball: r must be positive");
  if (exact_radial) return profile(norm(center) + r);
  int count = 64 * dim * dim + 1;  // low-discrepancy points plus the center
  double best = -std::numeric_limits<double>::infinity();
  for (const Pt& p : ball_sample(center, r, count)) best = std::max(best, eval(p));
  return best;
}

Potential Potential::constant(int dim, double value) {
  Potential p;
  p.dim = dim;
  p.eval = [value](std::span<const double>) { return value; };
  p.exact_radial = value >= 0;
  p.profile = [value](double) { return value; };
  return p;
}

double Weight::phi(std::span<const double> z) const {
  double s[2] = {0, 0};
  for (int j = 0; j < n_; ++j) s[j] = z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1];
  return P_.eval(s);
}

double Weight::phi_s(std::span<const double> s) const {
  require(static_cast<int>(s.size()) == n_, errc::invalid_argument, "phi_s: wrong arity");
  return P_.eval(s.data());
}

void Weight::grad(std::span<const double> z, double* out) const {
  double s[2] = {0, 0};
  for (int j = 0; j < n_; ++j) s[j] = z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1];
  for (int j = 0; j < n_; ++j) {
    double pj = Pj_[j].eval(s);
    out[2 * j] = 2 * z[2 * j] * pj;
    out[2 * j + 1] = 2 * z[2 * j + 1] * pj;
  }
}

void Weight::hessian(std::span<const double> z, cd* out) const {
  double s[2] = {0, 0};
  for (int j = 0; j < n_; ++j) s[j] = z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1];
  for (int j = 0; j < n_; ++j) {
    cd zbar_j(z[2 * j], -z[2 * j + 1]);
    for (int k = 0; k < n_; ++k) {
      cd zk(z[2 * k], z[2 * k + 1]);
      cd v = zbar_j * zk * Pjk_[j][k].eval(s);
      if (j == k) v += Pj_[j].eval(s);
      out[j * n_ + k] = v;
    }
  }
}

double Weight::laplacian(std::span<const double> z) const {
  double s[2] = {0, 0};
  for (int j = 0; j < n_; ++j) s[j] = z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1];
  double tr = 0;
  for (int j = 0; j < n_; ++j) tr += Pj_[j].eval(s) + s[j] * Pjk_[j][j].eval(s);
  return 4 * tr;
}

double Weight::hessian_min_eigenvalue(std::span<const double> z) const {
  cd H[4];
  hessian(z, H);
  if (n_ == 1) return H[0].real();
  double a = H[0].real(), c = H[3].real();
  double off = std::abs(H[1]);
  double mid = 0.5 * (a + c);
  return mid - std::sqrt(0.25 * (a - c) * (a - c) + off * off);
}

double Weight::phi_profile(double t) const {
  require(radial(), errc::invalid_argument, "phi_profile: weight is not radial");
  double tau = t * t, r = 0;
  for (size_t k = 0; k < radial_coeffs_.size(); ++k) r += radial_coeffs_[k] * ipow(tau, k);
  return r;
}

double Weight::laplacian_profile(double t) const {
  require(radial(), errc::invalid_argument, "laplacian_profile: weight is not radial");
  // phi = sum c_k tau^k, tau = t^2: laplacian = 4 sum_k k (n + k - 1) c_k tau^{k-1}.
  double tau = t * t, r = 0;
  for (size_t k = 1; k < radial_coeffs_.size(); ++k)
    r += 4.0 * k * (n_ + k - 1.0) * radial_coeffs_[k] * ipow(tau, k - 1);
  return r;
}

Potential Weight::laplacian_potential() const {
  Potential p;
  p.dim = real_dim();
  Weight copy = *this;
  p.eval = [copy](std::span<const double> z) { return copy.laplacian(z); };
  if (radial()) {
    bool monotone = true;
    for (size_t k = 1; k < radial_coeffs_.size(); ++k)
      if (radial_coeffs_[k] < 0) monotone = false;
    if (monotone) {
      p.exact_radial = true;
      p.profile = [copy](double t) { return copy.laplacian_profile(t); };
    }
  }
  return p;
}

namespace {

void build_spoly(Family family, int n, const WeightParams& p, SPoly& P,
                 std::vector<double>& radial_coeffs) {
  P.nvars = n;
  auto add = [&](double c, int e0, int e1) {
    if (c == 0) return;
    SPoly::Term t;
    t.c = c;
    t.e[0] = e0;
    t.e[1] = e1;
    P.terms.push_back(t);
  };
  switch (family) {
    case Family::fock:
      radial_coeffs = {0.0, 1.0};
      break;
    case Family::radial_power:
      require(p.m >= 1, errc::invalid_argument, "radial_power: m must be >= 1");
      radial_coeffs.assign(p.m + 1, 0.0);
      radial_coeffs[p.m] = 1.0;
      break;
    case Family::custom_radial: {
      // The one family with signed coefficients; plurisubharmonicity is enforced by
      // the construction-time eigenvalue probe instead of a sign precondition.
      radial_coeffs = p.coeffs;
      while (radial_coeffs.size() > 1 && radial_coeffs.back() == 0) radial_coeffs.pop_back();
      if (radial_coeffs.empty()) radial_coeffs.assign(1, 0.0);
      if (radial_coeffs.size() > 1)
        require(radial_coeffs.back() > 0, errc::invalid_argument,
                "custom_radial: leading coefficient must be positive");
      break;
    }
    case Family::gamma_monomials: {
      require(n == 2, errc::invalid_argument, "gamma_monomials: requires n=2");
      require(!p.gamma.empty(), errc::invalid_argument, "gamma_monomials: empty exponent set");
      std::vector<double> cs = p.coeffs;
      if (cs.empty()) cs.assign(p.gamma.size(), 1.0);
      require(cs.size() == p.gamma.size(), errc::invalid_argument,
              "gamma_monomials: coefficient count mismatch");
      for (size_t i = 0; i < p.gamma.size(); ++i) {
        auto [a, b] = std::pair{p.gamma[i][0], p.gamma[i][1]};
        require(a >= 0 && b >= 0 && a + b > 0, errc::invalid_argument,
                "gamma_monomials: exponents must be >= 0 with at least one nonzero");
        require(cs[i] > 0, errc::invalid_argument, "gamma_monomials: coefficients must be > 0");
        add(cs[i], a, b);
      }
      return;
    }
    case Family::decoupled: {
      require(n == static_cast<int>(p.powers.size()), errc::invalid_argument,
              "decoupled: needs one power per variable");
      std::vector<double> cs = p.coeffs;
      if (cs.empty()) cs.assign(p.powers.size(), 1.0);
      require(cs.size() == p.powers.size(), errc::invalid_argument,
              "decoupled: coefficient count mismatch");
      for (int j = 0; j < n; ++j) {
        require(p.powers[j] >= 1, errc::invalid_argument, "decoupled: powers must be >= 1");
        require(cs[j] > 0, errc::invalid_argument, "decoupled: coefficients must be > 0");
        add(cs[j], j == 0 ? p.powers[j] : 0, j == 1 ? p.powers[j] : 0);
      }
      return;
    }
  }
  // Radial families: expand (s_0 + ... + s_{n-1})^k.
  for (size_t k = 0; k < radial_coeffs.size(); ++k) {
    if (radial_coeffs[k] == 0) continue;
    if (n == 1) {
      add(radial_coeffs[k], static_cast<int>(k), 0);
    } else {
      for (int a = 0; a <= static_cast<int>(k); ++a)
        add(radial_coeffs[k] * binom(static_cast<int>(k), a), a, static_cast<int>(k) - a);
    }
  }
}

}  // namespace

Weight make_weight(Family family, int n, const WeightParams& params) {
  require(n == 1 || n == 2, errc::invalid_argument, "weight: n must be 1 or 2");
  Weight w;
  w.family_ = family;
  w.n_ = n;
  w.params_ = params;
  build_spoly(family, n, params, w.P_, w.radial_coeffs_);
  if (n == 1 && w.radial_coeffs_.empty()) {
    // Every one-variable weight is radial: recover phi = sum c_k |z|^{2k} from P.
    for (const SPoly::Term& t : w.P_.terms) {
      if (w.radial_coeffs_.size() <= static_cast<size_t>(t.e[0]))
        w.radial_coeffs_.resize(t.e[0] + 1, 0.0);
      w.radial_coeffs_[t.e[0]] += t.c;
    }
    if (w.radial_coeffs_.empty()) w.radial_coeffs_.assign(1, 0.0);
  }
  w.Pj_.resize(n);
  w.Pjk_.assign(n, std::vector<SPoly>(n));
  for (int j = 0; j < n; ++j) w.Pj_[j] = w.P_.deriv(j);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) w.Pjk_[j][k] = w.Pj_[j].deriv(k);

  // Plurisubharmonicity probe: coarse grid, minimum Hessian eigenvalue.
  for (const Pt& z : grid_points(Box::cube(2 * n, 2.0), 9)) {
    double lam = w.hessian_min_eigenvalue(z);
    if (lam < -1e-10)
      fail(errc::not_plurisubharmonic,
           "weight is not plurisubharmonic: min Hessian eigenvalue " + std::to_string(lam) +
               " at z = " + format_pt(z));
  }
  return w;
}

Weight make_weight_json(const std::string& spec_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(spec_json);
  } catch (const std::exception& e) {
    fail(errc::invalid_argument, std::string("weight spec: invalid JSON: ") + e.what());
  }
  try {
    require(j.contains("family"), errc::invalid_argument, "weight spec: missing \"family\"");
    Family fam = family_from_name(j.at("family").get<std::string>());
    int n = j.value("n", 1);
    WeightParams p;
    nlohmann::json prm = j.value("params", nlohmann::json::object());
    p.m = prm.value("m", 2);
    if (prm.contains("coeffs")) p.coeffs = prm.at("coeffs").get<std::vector<double>>();
    if (prm.contains("powers")) p.powers = prm.at("powers").get<std::vector<int>>();
    if (prm.contains("gamma"))
      for (const auto& pair : prm.at("gamma"))
        p.gamma.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
    return make_weight(fam, n, p);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(errc::invalid_argument, std::string("weight spec: ") + e.what());
  }
}

std::string weight_spec_json(const Weight& w) {
  nlohmann::json j;
  j["family"] = family_name(w.family());
  j["n"] = w.n();
  nlohmann::json prm = nlohmann::json::object();
  const WeightParams& p = w.params();
  if (w.family() == Family::radial_power) prm["m"] = p.m;
  if (!p.coeffs.empty()) prm["coeffs"] = p.coeffs;
  if (!p.powers.empty()) prm["powers"] = p.powers;
  if (!p.gamma.empty()) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& e : p.gamma) g.push_back({e[0], e[1]});
    prm["gamma"] = g;
  }
  j["params"] = prm;
  return j.dump();
}

ProbeOptions ProbeOptions::defaults(int n) {
  ProbeOptions o;
  o.box = Box::cube(2 * n, 2.0);
  o.per_axis = n == 1 ? 9 : 7;
  o.ball_centers_per_axis = n == 1 ? 5 : 5;
  o.radii = n == 1 ? std::vector<double>{0.25, 0.5, 1.0, 2.0} : std::vector<double>{0.5, 1.0};
  o.admissibility_c = 1.0;
  return o;
}

ComparabilityScan comparability_delta(const Weight& w, const std::vector<Pt>& probes) {
  require(!probes.empty(), errc::invalid_argument, "comparability_delta: empty probe set");
  ComparabilityScan r;
  r.delta_hat = std::numeric_limits<double>::infinity();
  for (const Pt& z : probes) {
    double lap = w.laplacian(z);
    if (lap <= 1e-14) {
      ++r.skipped;
      continue;
    }
    double ratio = std::max(0.0, w.hessian_min_eigenvalue(z)) / lap;
    if (ratio < r.delta_hat) {
      r.delta_hat = ratio;
      r.argmin = z;
    }
  }
  if (!std::isfinite(r.delta_hat))
    fail(errc::hypothesis_failed,
         "comparability undefined: laplacian vanishes at every probe point");
  return r;
}

DoublingScan doubling_constant(const Potential& V, const std::vector<Pt>& centers,
                               const std::vector<double>& radii) {
  require(!centers.empty() && !radii.empty(), errc::invalid_argument,
          "doubling_constant: empty probe set");
  DoublingScan r;
  r.arg_center = centers.front();
  r.arg_r = radii.front();
  int counted = 0;
  for (const Pt& x : centers) {
    for (double rad : radii) {
      double lo = V.sup_ball(x, rad);
      if (lo <= 1e-300) continue;  // vanishing sup: pair carries no ratio
      ++counted;
      double hi = V.sup_ball(x, 2 * rad);
      double q = hi / lo;
      if (q > r.D_hat) {
        r.D_hat = q;
        r.arg_center = x;
        r.arg_r = rad;
      }
    }
  }
  if (counted == 0)
    fail(errc::hypothesis_failed, "doubling undefined: potential vanishes on every probed ball");
  return r;
}

ReverseHolderScan reverse_holder_constant(const Weight& w, const std::vector<Pt>& centers,
                                          const std::vector<double>& radii) {
  require(!centers.empty() && !radii.empty(), errc::invalid_argument,
          "reverse_holder_constant: empty probe set");
  ReverseHolderScan r;
  r.arg_center = centers.front();
  Potential V = w.laplacian_potential();
  int d = w.real_dim();
  for (const Pt& x : centers) {
    for (double rad : radii) {
      double sup = V.sup_ball(x, rad);
      double mass = integrate_ball([&](std::span<const double> p) { return w.laplacian(p); }, x,
                                   rad);
      if (mass <= 1e-300) {
        if (sup > 1e-300) r.finite = false;
        continue;
      }
      double q = sup * ipow(rad, d) / mass;
      if (q > r.A_hat) {
        r.A_hat = q;
        r.arg_center = x;
        r.arg_r = rad;
      }
    }
  }
  if (r.A_hat == 0) r.finite = false;  // laplacian vanished identically on probes
  return r;
}

AdmissibilityScan admissibility_check(const Weight& w, double c, const std::vector<Pt>& centers,
                                      const std::vector<double>& radii) {
  require(c > 0, errc::invalid_argument, "admissibility_check: c must be positive");
  AdmissibilityScan r;
  r.c = c;
  r.inf_sup = std::numeric_limits<double>::infinity();
  Potential V = w.laplacian_potential();
  for (const Pt& x : centers) {
    double s = V.sup_ball(x, c);
    if (s < r.inf_sup) {
      r.inf_sup = s;
      r.arg_center = x;
    }
  }
  try {
    r.D_hat = doubling_constant(V, centers, radii).D_hat;
  } catch (const Error&) {
    r.D_hat = std::numeric_limits<double>::quiet_NaN();  // undefined: potential vanished
  }
  r.admissible = r.inf_sup > 0 && std::isfinite(r.D_hat);
  return r;
}

HypothesisReport hypothesis_scan(const Weight& w, const ProbeOptions& opts) {
  ProbeOptions o = opts;
  if (o.per_axis == 0) o = ProbeOptions::defaults(w.n());
  HypothesisReport rep;
  rep.n = w.n();
  rep.family = family_name(w.family());
  rep.sup_mode = w.laplacian_potential().exact_radial ? "exact-radial" : "sampled";
  std::vector<Pt> probes = grid_points(o.box, o.per_axis);
  std::vector<Pt> centers = grid_points(o.box, o.ball_centers_per_axis);
  try {
    rep.comparability = comparability_delta(w, probes);
  } catch (const Error& e) {
    rep.comparability.delta_hat = 0;
    rep.notes.push_back(e.what());
  }
  try {
    rep.doubling = doubling_constant(w.laplacian_potential(), centers, o.radii);
  } catch (const Error& e) {
    rep.doubling.D_hat = std::numeric_limits<double>::quiet_NaN();
    rep.notes.push_back(e.what());
  }
  rep.reverse_holder = reverse_holder_constant(w, centers, o.radii);
  if (!rep.reverse_holder.finite)
    rep.notes.push_back("reverse-Holder ratio degenerate on the probe set");
  rep.admissibility = admissibility_check(w, o.admissibility_c, centers, o.radii);
  rep.gate_open = rep.admissibility.admissible && rep.reverse_holder.finite &&
                  rep.comparability.delta_hat > 0;
  return rep;
}

}  // namespace bergamot
