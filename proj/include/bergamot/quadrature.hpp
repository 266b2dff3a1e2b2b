#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <bergamot/geometry.hpp>

namespace bergamot {

// Gauss-Legendre nodes/weights on [-1,1]; computed once per order and cached.
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int order);

// Fixed-rule integral over [a,b] with `panels` panels of GL-32 each.
double panel_integral(const std::function<double(double)>& f, double a, double b, int panels);
std::complex<double> panel_integral_c(const std::function<std::complex<double>(double)>& f,
                                      double a, double b, int panels);

// Panel-doubling adaptive integral over [a,b]: refine until successive values
// agree to reltol (relative, with a small absolute floor). Throws errc::numerical
// when the refinement cap is hit without settling.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double reltol = 1e-10);
std::complex<double> integrate_c(const std::function<std::complex<double>(double)>& f, double a,
                                 double b, double reltol = 1e-10);

// log ∫_0^∞ e^{g(s)} ds for a unimodal-after-scan exponent g. The peak is located on a
// log-spaced scan and polished; the domain is expanded by interval doubling until the
// integrand falls 46 e-folds below the peak, then integrated by panel-doubled GL-32 to 1e-12
// relative. Throws errc::numerical when the mass keeps growing (divergent moment) or the
// refinement does not settle.
double log_integral_halfline(const std::function<double(double)>& g);

// ∫ over the euclidean ball B(center, r), dim 2 or 4. Product rules:
// dim 2: GL-32 radial x 64-point uniform angular;
// dim 4: GL-16 radial x (GL-8 latitude) x 16x16 uniform torus angles.
// Exact for smooth low-harmonic integrands well beyond the polynomial degrees used here.
double integrate_ball(const std::function<double(std::span<const double>)>& f,
                      std::span<const double> center, double r);

double ball_volume(int dim, double r);

}  // namespace bergamot
