#include <bergamot/kernel.hpp>

#include <bergamot/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bergamot {

namespace {

constexpr double kLogPi = 1.1447298858494001741;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

long shell_start(int s) { return static_cast<long>(s) * (s + 1) / 2; }

double log_radial_moment(const Weight& w, int var_count, double power) {
  // log of integral s^power e^{-2 P(s,0)} ds; the second slot is only meaningful
  // for radial n=2 weights where P depends on the total s alone.
  auto g = [&](double s) {
    double sv[2] = {s, 0};
    return power * std::log(s) - 2 * w.phi_s(std::span<const double>(sv, var_count));
  };
  return log_integral_halfline(g);
}

std::string alpha_name(int a, int b, int n) {
  return n == 1 ? std::to_string(a) : "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

// Evaluate one log-coefficient, converting quadrature divergence into an error
// that names the offending multi-index.
template <class F>
double guarded_coeff(int a, int b, int n, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == errc::numerical)
      fail(errc::numerical, "kernel coefficient c_" + alpha_name(a, b, n) +
                                " diverges (weight grows too slowly)");
    throw;
  }
}

}  // namespace

double KernelModel::log_coeff(int a, int b) const {
  require(a >= 0 && b >= 0 && a + b <= degree_ && (n_ == 2 || b == 0), errc::invalid_argument,
          "kernel: coefficient index out of range");
  return n_ == 1 ? log_c_[a] : log_c_[shell_start(a + b) + b];
}

KernelModel build_kernel(const Weight& w, int degree) {
  require(degree >= 0 && degree <= 2048, errc::invalid_argument,
          "kernel degree must be in [0, 2048]");
  KernelModel m;
  m.n_ = w.n();
  m.degree_ = degree;
  m.weight_ = w;
  if (m.n_ == 1) {
    m.log_c_.resize(degree + 1);
    for (int k = 0; k <= degree; ++k)
      m.log_c_[k] =
          guarded_coeff(k, 0, 1, [&] { return kLogPi + log_radial_moment(w, 1, k); });
  } else if (w.family() == Family::decoupled) {
    std::vector<std::vector<double>> lc(2, std::vector<double>(degree + 1));
    for (int j = 0; j < 2; ++j) {
      double cj = w.params().coeffs.empty() ? 1.0 : w.params().coeffs[j];
      int pj = w.params().powers[j];
      for (int k = 0; k <= degree; ++k) {
        auto g = [&](double s) { return k * std::log(s) - 2 * cj * std::pow(s, pj); };
        lc[j][k] = guarded_coeff(j == 0 ? k : 0, j == 0 ? 0 : k, 2,
                                 [&] { return kLogPi + log_integral_halfline(g); });
      }
    }
    m.log_c_.resize(shell_start(degree + 1));
    for (int s = 0; s <= degree; ++s)
      for (int b = 0; b <= s; ++b) m.log_c_[shell_start(s) + b] = lc[0][s - b] + lc[1][b];
  } else if (w.radial()) {
    // c_(a,b) = pi^2 B(a+1,b+1) * integral tau^{a+b+1} e^{-2P(tau)} dtau.
    std::vector<double> shell_int(degree + 1);
    for (int s = 0; s <= degree; ++s)
      shell_int[s] =
          guarded_coeff(s, 0, 2, [&] { return log_radial_moment(w, 2, s + 1); });
    m.log_c_.resize(shell_start(degree + 1));
    for (int s = 0; s <= degree; ++s)
      for (int b = 0; b <= s; ++b) {
        int a = s - b;
        double logbeta = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) - std::lgamma(s + 2.0);
        m.log_c_[shell_start(s) + b] = 2 * kLogPi + logbeta + shell_int[s];
      }
  } else {
    // General per-variable rotation-invariant weight: nested 1-D quadratures.
    m.log_c_.resize(shell_start(degree + 1));
    for (int s = 0; s <= degree; ++s)
      for (int b = 0; b <= s; ++b) {
        int a = s - b;
        auto outer = [&](double s1) {
          auto inner = [&](double s0) {
            double sv[2] = {s0, s1};
            return a * std::log(s0) - 2 * w.phi_s(sv);
          };
          return b * std::log(s1) + log_integral_halfline(inner);
        };
        m.log_c_[shell_start(s) + b] =
            guarded_coeff(a, b, 2, [&] { return 2 * kLogPi + log_integral_halfline(outer); });
      }
  }

  // Probe the diagonal for the largest radius with a clean tail estimate.
  double R = 0;
  for (double r = 0.05; r <= 20.0; r += 0.05) {
    Pt z(2 * m.n_, 0.0);
    z[0] = r;
    if (eval_kernel(m, z, z).tail_flag) break;
    R = r;
  }
  m.validated_radius_ = R;
  return m;
}

KernelValue eval_kernel(const KernelModel& m, std::span<const double> z,
                        std::span<const double> w) {
  int n = m.n();
  require(static_cast<int>(z.size()) == 2 * n && z.size() == w.size(), errc::invalid_argument,
          "kernel eval: wrong point dimension");
  int N = m.degree();
  KernelValue out;
  out.degree = N;

  cd prod[2] = {cd(1, 0), cd(1, 0)};
  double lmod[2] = {0, 0};
  cd phase[2] = {cd(1, 0), cd(1, 0)};
  for (int j = 0; j < n; ++j) {
    prod[j] = cd(z[2 * j], z[2 * j + 1]) * std::conj(cd(w[2 * j], w[2 * j + 1]));
    double a = std::abs(prod[j]);
    lmod[j] = a > 0 ? std::log(a) : kNegInf;
    phase[j] = a > 0 ? prod[j] / a : cd(1, 0);
  }

  auto log_term = [&](int a, int b) {
    double lt = -(n == 1 ? m.log_coeff(a) : m.log_coeff(a, b));
    if (a > 0) {
      if (lmod[0] == kNegInf) return kNegInf;
      lt += a * lmod[0];
    }
    if (b > 0) {
      if (lmod[1] == kNegInf) return kNegInf;
      lt += b * lmod[1];
    }
    return lt;
  };

  double mstar = kNegInf;
  for (int s = 0; s <= N; ++s)
    for (int b = 0; b <= (n == 1 ? 0 : s); ++b)
      mstar = std::max(mstar, log_term(n == 1 ? s : s - b, b));

  // Second pass: shell-ordered accumulation (deterministic and symmetric in z<->w).
  std::vector<double> shell_abs(N + 1, 0.0);
  std::vector<cd> ph0(N + 1), ph1(n == 1 ? 1 : N + 1);
  ph0[0] = cd(1, 0);
  for (int k = 1; k <= N; ++k) ph0[k] = ph0[k - 1] * phase[0];
  if (n == 2) {
    ph1[0] = cd(1, 0);
    for (int k = 1; k <= N; ++k) ph1[k] = ph1[k - 1] * phase[1];
  }
  cd sum(0, 0);
  double total = 0;
  for (int s = 0; s <= N; ++s) {
    int bmax = n == 1 ? 0 : s;
    for (int b = 0; b <= bmax; ++b) {
      int a = n == 1 ? s : s - b;
      double lt = log_term(a, b);
      if (lt == kNegInf) continue;
      double mag = std::exp(lt - mstar);
      cd term = mag * ph0[a] * (n == 2 ? ph1[b] : cd(1, 0));
      sum += term;
      shell_abs[s] += mag;
      total += mag;
    }
  }
  out.K = std::exp(mstar) * sum;

  if (N >= 1 && shell_abs[N] > 0 && total > 0) {
    double r = shell_abs[N - 1] > 0 ? shell_abs[N] / shell_abs[N - 1]
                                    : std::numeric_limits<double>::infinity();
    out.tail = r < 0.9999 ? shell_abs[N] * r / ((1 - r) * total)
                          : std::numeric_limits<double>::infinity();
  }
  out.tail_flag = out.tail > KernelModel::tail_threshold;
  return out;
}

namespace {

cd horner(const std::vector<cd>& coeffs, cd z) {
  cd v(0, 0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * z + *it;
  return v;
}

// Cut radius for weighted-moment quadrature: past the maximizer of
// deg*ln r - 2 phi(r), integrate until the exponent has dropped 60 e-folds.
double cut_radius(const Weight& w, int deg) {
  auto q = [&](double r) {
    Pt z(2 * w.n(), 0.0);
    z[0] = r;
    return deg * std::log(r) - 2 * w.phi(z);
  };
  double qmax = kNegInf, rbest = 1;
  for (double r = 0.05; r <= 100.0; r += 0.05) {
    double v = q(r);
    if (v > qmax) {
      qmax = v;
      rbest = r;
    } else if (v < qmax - 60) {
      return r;
    }
  }
  fail(errc::numerical, "weighted moments do not decay within the probe range");
  (void)rbest;
}

}  // namespace

double reproducing_audit(const KernelModel& m, const std::vector<cd>& h_coeffs,
                         const std::vector<Pt>& z_probes) {
  require(m.n() == 1, errc::invalid_argument, "reproducing audit supports n=1 models");
  require(!h_coeffs.empty() && static_cast<int>(h_coeffs.size()) - 1 <= m.degree(),
          errc::invalid_argument, "reproducing audit: deg h must be <= model degree");
  const Weight& w = m.weight();
  int N = m.degree();
  int dh = static_cast<int>(h_coeffs.size()) - 1;
  double R = cut_radius(w, N + dh);
  int panels = std::max(8, static_cast<int>(std::ceil(R * 4)));
  int M = 2 * N + 16;
  const GaussRule& rule = gauss_legendre(32);

  double worst = 0;
  for (const Pt& z : z_probes) {
    cd acc(0, 0);
    for (int p = 0; p < panels; ++p) {
      double a = R * p / panels, b = R * (p + 1) / panels;
      for (size_t i = 0; i < rule.x.size(); ++i) {
        double r = 0.5 * (a + b) + 0.5 * (b - a) * rule.x[i];
        double wr = 0.5 * (b - a) * rule.w[i] * r * (2 * M_PI / M);
        for (int l = 0; l < M; ++l) {
          double th = 2 * M_PI * l / M;
          Pt wp{r * std::cos(th), r * std::sin(th)};
          cd K = eval_kernel(m, z, wp).K;
          cd hv = horner(h_coeffs, cd(wp[0], wp[1]));
          acc += K * hv * std::exp(-2 * w.phi(wp)) * wr;
        }
      }
    }
    double resid = std::abs(acc - horner(h_coeffs, cd(z[0], z[1])));
    worst = std::max(worst, resid);
  }
  return worst;
}

double diag_variational_ratio(const KernelModel& m, std::span<const double> z) {
  int n = m.n();
  double lmod[2] = {0, 0};
  for (int j = 0; j < n; ++j) {
    double s = z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1];
    lmod[j] = s > 0 ? std::log(s) : kNegInf;
  }
  int N = m.degree();
  double mstar = kNegInf;
  auto log_term = [&](int a, int b) {
    double lt = -(n == 1 ? m.log_coeff(a) : m.log_coeff(a, b));
    if (a > 0) {
      if (lmod[0] == kNegInf) return kNegInf;
      lt += a * lmod[0];
    }
    if (b > 0) {
      if (lmod[1] == kNegInf) return kNegInf;
      lt += b * lmod[1];
    }
    return lt;
  };
  for (int s = 0; s <= N; ++s)
    for (int b = 0; b <= (n == 1 ? 0 : s); ++b)
      mstar = std::max(mstar, log_term(n == 1 ? s : s - b, b));
  double sup = 0;
  for (int s = 0; s <= N; ++s)
    for (int b = 0; b <= (n == 1 ? 0 : s); ++b) {
      double lt = log_term(n == 1 ? s : s - b, b);
      if (lt != kNegInf) sup += std::exp(lt - mstar);
    }
  double K = eval_kernel(m, z, z).K.real();
  return std::exp(mstar) * sup / K;
}

cd monomial_inner(const Weight& w, int a, int b) {
  require(w.n() == 1, errc::invalid_argument, "monomial inner product supports n=1");
  double R = cut_radius(w, a + b);
  int panels = std::max(8, static_cast<int>(std::ceil(R * 4)));
  int M = a + b + 7;
  const GaussRule& rule = gauss_legendre(32);
  cd acc(0, 0);
  for (int p = 0; p < panels; ++p) {
    double lo = R * p / panels, hi = R * (p + 1) / panels;
    for (size_t i = 0; i < rule.x.size(); ++i) {
      double r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.x[i];
      double wr = 0.5 * (hi - lo) * rule.w[i] * r * (2 * M_PI / M);
      for (int l = 0; l < M; ++l) {
        double th = 2 * M_PI * l / M;
        Pt zp{r * std::cos(th), r * std::sin(th)};
        cd zc(zp[0], zp[1]);
        acc += std::pow(zc, a) * std::pow(std::conj(zc), b) * std::exp(-2 * w.phi(zp)) * wr;
      }
    }
  }
  return acc;
}

SubMeanValueAudit submeanvalue_audit(const Weight& w, const RadiusField& rho,
                                     const std::vector<cd>& h_coeffs,
                                     const std::vector<std::pair<Pt, double>>& samples) {
  require(w.n() == 1, errc::invalid_argument, "sub-mean-value audit supports n=1");
  require(!samples.empty(), errc::invalid_argument, "sub-mean-value audit: empty sample set");
  SubMeanValueAudit a;
  for (const auto& [z, r] : samples) {
    require(r > 0 && r <= rho(z) * (1 + 1e-9), errc::invalid_argument,
            "sub-mean-value audit: sample radius exceeds rho(z)");
    double num =
        std::norm(horner(h_coeffs, cd(z[0], z[1]))) * std::exp(-2 * w.phi(z)) * ball_volume(2, r);
    double den = integrate_ball(
        [&](std::span<const double> p) {
          return std::norm(horner(h_coeffs, cd(p[0], p[1]))) * std::exp(-2 * w.phi(p));
        },
        z, r);
    require(den > 0, errc::numerical, "sub-mean-value audit: vanishing ball integral");
    double ratio = num / den;
    if (ratio > a.c_hol) {
      a.c_hol = ratio;
      a.witness = z;
      a.witness_r = r;
    }
  }
  return a;
}

}  // namespace bergamot
