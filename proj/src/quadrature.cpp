#include <bergamot/quadrature.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace bergamot {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kTwoPi = 2 * kPi;
}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.x.resize(order);
  rule.w.resize(order);
  int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton on P_n with the Chebyshev-like initial guess.
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      pp = order * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = -x;
    rule.x[order - 1 - i] = x;
    rule.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.w[order - 1 - i] = rule.w[i];
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

namespace {

template <class T, class F>
T panel_integral_t(const F& f, double a, double b, int panels) {
  const GaussRule& g = gauss_legendre(32);
  T total{};
  double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * w;
    double c = lo + 0.5 * w, half = 0.5 * w;
    T s{};
    for (size_t i = 0; i < g.x.size(); ++i) s += T(g.w[i]) * f(c + half * g.x[i]);
    total += T(half) * s;
  }
  return total;
}

template <class T, class F>
T integrate_t(const F& f, double a, double b, double reltol) {
  if (a == b) return T{};
  T prev = panel_integral_t<T>(f, a, b, 1);
  int panels = 2;
  for (int step = 0; step < 14; ++step) {
    T cur = panel_integral_t<T>(f, a, b, panels);
    double scale = std::max(std::abs(cur), 1e-300);
    if (std::abs(cur - prev) <= reltol * scale + 1e-300) return cur;
    prev = cur;
    panels *= 2;
  }
  fail(errc::numerical, "integrate: panel refinement did not settle");
}

}  // namespace

double panel_integral(const std::function<double(double)>& f, double a, double b, int panels) {
  return panel_integral_t<double>(f, a, b, panels);
}

std::complex<double> panel_integral_c(const std::function<std::complex<double>(double)>& f,
                                      double a, double b, int panels) {
  return panel_integral_t<std::complex<double>>(f, a, b, panels);
}

double integrate(const std::function<double(double)>& f, double a, double b, double reltol) {
  return integrate_t<double>(f, a, b, reltol);
}

std::complex<double> integrate_c(const std::function<std::complex<double>(double)>& f, double a,
                                 double b, double reltol) {
  return integrate_t<std::complex<double>>(f, a, b, reltol);
}

double log_integral_halfline(const std::function<double(double)>& g) {
  // Locate the peak on a log-spaced scan over [1e-12, 1e9].
  double best_s = 1e-12, best_g = -std::numeric_limits<double>::infinity();
  constexpr int kScan = 430;
  for (int i = 0; i <= kScan; ++i) {
    double s = std::pow(10.0, -12.0 + 21.0 * i / kScan);
    double v = g(s);
    if (v > best_g) {
      best_g = v;
      best_s = s;
    }
  }
  if (!std::isfinite(best_g)) fail(errc::numerical, "log_integral_halfline: exponent not finite");

  // Golden-section polish around the scanned peak.
  {
    double lo = best_s / 10, hi = best_s * 10;
    const double gr = 0.61803398874989485;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 120; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = g(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = g(x1);
      }
    }
    double s = 0.5 * (lo + hi), v = g(s);
    if (v > best_g) {
      best_g = v;
      best_s = s;
    }
  }

  const double M = best_g;
  const double drop = 46.0;  // e^-46 ~ 1e-20 below the peak

  // Expand right end by doubling until the integrand has dropped; unbounded growth of the
  // retained mass signals a divergent weight (grows too slowly).
  double hi = best_s;
  for (int it = 0;; ++it) {
    if (g(hi) < M - drop) break;
    if (it >= 90) fail(errc::numerical, "log_integral_halfline: no decay on the right (divergent)");
    hi *= 2;
  }
  // Left end: toward 0 the measure ds is finite, so s=0 is always an admissible endpoint.
  double lo = best_s;
  for (int it = 0; it < 90 && lo > 1e-300; ++it) {
    if (g(lo) < M - drop) break;
    lo *= 0.25;
    if (lo < 1e-250) {
      lo = 0;
      break;
    }
  }
  if (lo > 0 && g(lo) >= M - drop) lo = 0;

  auto scaled = [&](double s) { return std::exp(g(s) - M); };
  // g carries rounding jitter of order ulp(|M|), so exp(g - M) cannot settle below
  // |M| * eps relative; only reached when |M| is huge and the mass is negligible anyway.
  const double reltol = std::max(1e-12, std::abs(M) * 1e-15);
  double I = integrate_t<double>(scaled, lo, hi, reltol);
  if (!(I > 0) || !std::isfinite(I))
    fail(errc::numerical, "log_integral_halfline: vanishing or invalid mass");
  return M + std::log(I);
}

double integrate_ball(const std::function<double(std::span<const double>)>& f,
                      std::span<const double> center, double r) {
  int d = static_cast<int>(center.size());
  require(d == 2 || d == 4, errc::invalid_argument, "integrate_ball: dim must be 2 or 4");
  if (d == 2) {
    const GaussRule& gr = gauss_legendre(32);
    constexpr int kAng = 64;
    double total = 0;
    for (size_t i = 0; i < gr.x.size(); ++i) {
      double rad = 0.5 * r * (gr.x[i] + 1.0);
      double wr = 0.5 * r * gr.w[i] * rad;
      double ring = 0;
      for (int a = 0; a < kAng; ++a) {
        double th = kTwoPi * a / kAng;
        double p[2] = {center[0] + rad * std::cos(th), center[1] + rad * std::sin(th)};
        ring += f(std::span<const double>(p, 2));
      }
      total += wr * ring * (kTwoPi / kAng);
    }
    return total;
  }
  const GaussRule& gr = gauss_legendre(16);
  const GaussRule& gu = gauss_legendre(8);
  constexpr int kAng = 16;
  double total = 0;
  for (size_t i = 0; i < gr.x.size(); ++i) {
    double rad = 0.5 * r * (gr.x[i] + 1.0);
    double wr = 0.5 * r * gr.w[i] * rad * rad * rad;
    for (size_t j = 0; j < gu.x.size(); ++j) {
      double u = 0.5 * (gu.x[j] + 1.0);  // u = sin^2(latitude), measure du/2
      double wu = 0.25 * gu.w[j];
      double sa = std::sqrt(u), ca = std::sqrt(1.0 - u);
      double shell = 0;
      for (int a1 = 0; a1 < kAng; ++a1) {
        double t1 = kTwoPi * a1 / kAng;
        for (int a2 = 0; a2 < kAng; ++a2) {
          double t2 = kTwoPi * a2 / kAng;
          double p[4] = {center[0] + rad * ca * std::cos(t1), center[1] + rad * ca * std::sin(t1),
                         center[2] + rad * sa * std::cos(t2), center[3] + rad * sa * std::sin(t2)};
          shell += f(std::span<const double>(p, 4));
        }
      }
      total += wr * wu * shell * (kTwoPi / kAng) * (kTwoPi / kAng);
    }
  }
  return total;
}

double ball_volume(int dim, double r) {
  require(dim == 2 || dim == 4, errc::invalid_argument, "ball_volume: dim must be 2 or 4");
  return dim == 2 ? kPi * r * r : 0.5 * kPi * kPi * r * r * r * r;
}

}  // namespace bergamot
