#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <bergamot/errors.hpp>
#include <bergamot/kernel.hpp>
#include <bergamot/radius.hpp>
#include <bergamot/weight.hpp>

using namespace bergamot;
using doctest::Approx;

namespace {

constexpr double kPi = 3.14159265358979323846;

cd to_c(double x, double y) { return {x, y}; }

// Fock closed form in one variable: K(z,w) = (2/pi) exp(2 z conj(w)).
cd fock_K(cd z, cd w) { return 2.0 / kPi * std::exp(2.0 * z * std::conj(w)); }

}  // namespace

TEST_CASE("fock coefficients match the gamma closed form") {
  const KernelModel m = build_kernel(make_weight(Family::fock, 1), 24);
  for (int k = 0; k <= 20; ++k) {
    const double expect = std::log(kPi) + std::lgamma(k + 1.0) - (k + 1) * std::log(2.0);
    CHECK(m.log_coeff(k) == Approx(expect).epsilon(1e-10));
  }
  CHECK(std::exp(m.log_coeff(0)) == Approx(kPi / 2).epsilon(1e-10));
  CHECK(std::exp(m.log_coeff(1)) == Approx(kPi / 4).epsilon(1e-10));
  CHECK(std::exp(m.log_coeff(2)) == Approx(kPi / 4).epsilon(1e-10));
}

TEST_CASE("fock kernel matches the exponential closed form") {
  const KernelModel m = build_kernel(make_weight(Family::fock, 1), 64);
  const std::vector<cd> pts = {to_c(0, 0),   to_c(0.5, 0),  to_c(-1, 0.5),
                               to_c(0, 2),   to_c(1.5, -1), to_c(-0.7, -1.8),
                               to_c(2, 0.1), to_c(0.3, 0.4)};
  for (cd z : pts)
    for (cd w : pts) {
      const KernelValue kv = eval_kernel(m, Pt{z.real(), z.imag()}, Pt{w.real(), w.imag()});
      const cd exact = fock_K(z, w);
      CHECK(std::abs(kv.K - exact) <= 1e-8 * std::abs(exact));
      CHECK_FALSE(kv.tail_flag);
    }
  CHECK(eval_kernel(m, Pt{0, 0}, Pt{0, 0}).K.real() ==
        Approx(0.63661977236758134).epsilon(1e-12));
}

TEST_CASE("conjugate symmetry is exact") {
  const KernelModel m = build_kernel(make_weight(Family::radial_power, 1, {.m = 2}), 40);
  const Pt z{0.83, -0.31}, w{-0.42, 0.95};
  const cd a = eval_kernel(m, z, w).K;
  const cd b = eval_kernel(m, w, z).K;
  CHECK(a.real() == b.real());
  CHECK(a.imag() == -b.imag());
}

TEST_CASE("quartic weight kernel constants") {
  const KernelModel m = build_kernel(make_weight(Family::radial_power, 1, {.m = 2}), 340);
  // c_0 = integral e^{-2|z|^4} = pi^{3/2}/(2 sqrt 2).
  CHECK(std::exp(m.log_coeff(0)) == Approx(1.96870124321530247).epsilon(1e-12));
  CHECK(eval_kernel(m, Pt{0, 0}, Pt{0, 0}).K.real() ==
        Approx(0.507949087473927758).epsilon(1e-10));
  CHECK(m.validated_radius() >= 2.66);

  const KernelModel low = build_kernel(make_weight(Family::radial_power, 1, {.m = 2}), 8);
  CHECK(low.validated_radius() < 1.5);
  CHECK(eval_kernel(low, Pt{2, 0}, Pt{2, 0}).tail_flag);
}

TEST_CASE("two-variable kernels agree across assembly paths") {
  // |z1|^2 + |z2|^2 three ways: radial fock, decoupled product, general monomial sum.
  const KernelModel fock2 = build_kernel(make_weight(Family::fock, 2), 24);
  const KernelModel dec = build_kernel(
      make_weight(Family::decoupled, 2, {.coeffs = {1.0, 1.0}, .powers = {1, 1}}), 24);
  WeightParams gp;
  gp.gamma = {{1, 0}, {0, 1}};
  gp.coeffs = {1.0, 1.0};
  const KernelModel gam = build_kernel(make_weight(Family::gamma_monomials, 2, gp), 16);

  const std::vector<Pt> pts = {Pt{0, 0, 0, 0}, Pt{0.3, -0.2, 0.5, 0.1},
                               Pt{0.1, 0.4, -0.3, 0.2}, Pt{-0.6, 0.1, 0.2, -0.5}};
  for (const Pt& z : pts)
    for (const Pt& w : pts) {
      const cd z1 = to_c(z[0], z[1]), z2 = to_c(z[2], z[3]);
      const cd w1 = to_c(w[0], w[1]), w2 = to_c(w[2], w[3]);
      const cd exact = fock_K(z1, w1) * fock_K(z2, w2);
      const cd kf = eval_kernel(fock2, z, w).K;
      const cd kd = eval_kernel(dec, z, w).K;
      const cd kg = eval_kernel(gam, z, w).K;
      CHECK(std::abs(kf - exact) <= 1e-8 * std::abs(exact));
      CHECK(std::abs(kd - exact) <= 1e-8 * std::abs(exact));
      CHECK(std::abs(kg - exact) <= 1e-7 * std::abs(exact));
    }

  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b) {
      const double expect = 2 * std::log(kPi) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                            (a + b + 2) * std::log(2.0);
      CHECK(fock2.log_coeff(a, b) == Approx(expect).epsilon(1e-9));
      CHECK(dec.log_coeff(a, b) == Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("reproducing property audit") {
  const KernelModel m = build_kernel(make_weight(Family::fock, 1), 24);
  const std::vector<Pt> probes = {Pt{0, 0}, Pt{0.5, 0}, Pt{-0.8, 0.3}, Pt{1.2, -0.7}};
  CHECK(reproducing_audit(m, {cd(1, 0)}, probes) <= 1e-6);
  CHECK(reproducing_audit(m, {cd(0, 0), cd(1, 0)}, probes) <= 1e-6);
  CHECK(reproducing_audit(m, {cd(0.2, -0.1), cd(0, 0), cd(0.3, 0.4)}, probes) <= 1e-6);

  const KernelModel q = build_kernel(make_weight(Family::radial_power, 1, {.m = 2}), 60);
  const std::vector<Pt> qprobes = {Pt{0, 0}, Pt{0.6, 0}, Pt{0, -0.9}};
  CHECK(reproducing_audit(q, {cd(0, 0), cd(1, 0)}, qprobes) <= 1e-5);

  CHECK_THROWS_AS(reproducing_audit(m, {}, probes), Error);
}

TEST_CASE("diagonal variational identity") {
  const KernelModel m = build_kernel(make_weight(Family::fock, 1), 32);
  CHECK(diag_variational_ratio(m, Pt{0.7, -0.3}) == Approx(1.0).epsilon(1e-10));
  const KernelModel q = build_kernel(make_weight(Family::radial_power, 1, {.m = 2}), 60);
  CHECK(diag_variational_ratio(q, Pt{1, 0}) == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("monomial moments are diagonal") {
  const Weight fock = make_weight(Family::fock, 1);
  CHECK(std::abs(monomial_inner(fock, 2, 5)) <= 1e-9);
  CHECK(std::abs(monomial_inner(fock, 1, 0)) <= 1e-9);
  CHECK(monomial_inner(fock, 3, 3).real() == Approx(3 * kPi / 8).epsilon(1e-10));
  const Weight q = make_weight(Family::radial_power, 1, {.m = 2});
  CHECK(std::abs(monomial_inner(q, 0, 4)) <= 1e-9);
}

TEST_CASE("sub-mean-value audit") {
  const Weight fock = make_weight(Family::fock, 1);
  const RadiusField rho = RadiusField::constant(2, 0.5);
  const SubMeanValueAudit a =
      submeanvalue_audit(fock, rho, {cd(1, 0)}, {{Pt{0, 0}, 0.5}});
  // pi r^2 e^0 / integral_B e^{-2|w|^2} = 0.5 / (1 - e^{-1/2}).
  CHECK(a.c_hol == Approx(1.27074704126839914).epsilon(1e-9));

  const Weight flat = make_weight(Family::custom_radial, 1, {.coeffs = {0.0}});
  const RadiusField one = RadiusField::constant(2, 1.0);
  CHECK(submeanvalue_audit(flat, one, {cd(1, 0)}, {{Pt{0, 0}, 0.7}}).c_hol ==
        Approx(1.0).epsilon(1e-9));
  // h = z against Lebesgue measure: mean of |w|^2 over B(c,r) is |c|^2 + r^2/2.
  const SubMeanValueAudit b =
      submeanvalue_audit(flat, one, {cd(0, 0), cd(1, 0)}, {{Pt{0.5, 0}, 0.3}});
  CHECK(b.c_hol == Approx(0.25 / (0.25 + 0.045)).epsilon(1e-6));
  CHECK(b.c_hol <= 1.0 + 1e-9);

  CHECK_THROWS_AS(submeanvalue_audit(fock, rho, {cd(1, 0)}, {{Pt{0, 0}, 2.0}}), Error);
}

TEST_CASE("kernel build guards") {
  CHECK_THROWS_AS(build_kernel(make_weight(Family::fock, 1), -1), Error);
  bool threw = false;
  try {
    build_kernel(make_weight(Family::custom_radial, 1, {.coeffs = {0.0}}), 8);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == errc::numerical);
    CHECK(std::string(e.what()).find("c_0") != std::string::npos);
  }
  CHECK(threw);

  const KernelModel m = build_kernel(make_weight(Family::fock, 1), 8);
  CHECK_THROWS_AS(m.log_coeff(9), Error);
  CHECK_THROWS_AS(eval_kernel(m, Pt{0, 0}, Pt{0, 0, 0, 0}), Error);
}
