#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <bergamot/errors.hpp>
#include <bergamot/radius.hpp>
#include <bergamot/weight.hpp>

using namespace bergamot;
using doctest::Approx;

namespace {

// For V = 16|z|^2 the defining equation r^2 sup_{B(x,r)} V = 1 reads 4r(|x|+r) = 1,
// so rho(x) = (sqrt(|x|^2+1) - |x|)/2.
double rho_quartic(double x) { return 0.5 * (std::sqrt(x * x + 1) - x); }

RadiusField quartic_rho() {
  return RadiusField::from_potential(
      make_weight(Family::radial_power, 1, {.m = 2}).laplacian_potential());
}

}  // namespace

TEST_CASE("from_potential closed forms for the quartic weight") {
  const RadiusField rho = quartic_rho();
  CHECK(rho.dim() == 2);
  CHECK(rho.provenance() == RadiusProvenance::from_potential);
  CHECK(rho(Pt{0, 0}) == Approx(0.5).epsilon(1e-8));
  CHECK(rho(Pt{1, 0}) == Approx((std::sqrt(2.0) - 1) / 2).epsilon(1e-8));
  CHECK(rho(Pt{0, 2}) == Approx((std::sqrt(5.0) - 2) / 2).epsilon(1e-8));
  CHECK(rho(Pt{0.6, 0.8}) == Approx(rho_quartic(1.0)).epsilon(1e-8));

  // Scaling the potential by 4: 8r(|x|+r) = 1.
  const Weight w = make_weight(Family::radial_power, 1, {.m = 2});
  Potential V4 = w.laplacian_potential();
  auto base_prof = V4.profile;
  V4.eval = [w](std::span<const double> z) { return 4 * w.laplacian(z); };
  V4.profile = [base_prof](double t) { return 4 * base_prof(t); };
  const RadiusField rho4 = RadiusField::from_potential(V4);
  CHECK(rho4(Pt{0, 0}) == Approx(std::sqrt(2.0) / 4).epsilon(1e-8));
  CHECK(rho4(Pt{1, 0}) == Approx((std::sqrt(96.0) - 8) / 16).epsilon(1e-8));
}

TEST_CASE("constant potential gives constant radius") {
  const Weight fock = make_weight(Family::fock, 1);
  const RadiusField rho = RadiusField::from_potential(fock.laplacian_potential());
  CHECK(rho(Pt{0, 0}) == Approx(0.5).epsilon(1e-9));
  CHECK(rho(Pt{1.7, -2.3}) == Approx(0.5).epsilon(1e-9));

  const RadiusField c = RadiusField::constant(2, 0.5);
  CHECK(c(Pt{3, 4}) == 0.5);
  CHECK(c.radial());
  CHECK(c.profile(9.0) == 0.5);
  CHECK(c.c_hat() == 1.0);
  CHECK_THROWS_AS(RadiusField::constant(2, 0.0), Error);
}

TEST_CASE("radius potential sandwich audit") {
  const Weight w = make_weight(Family::radial_power, 1, {.m = 2});
  const Potential V = w.laplacian_potential();
  const RadiusField rho = RadiusField::from_potential(V);
  const auto probes = grid_points(Box::cube(2, 2.0), 10);
  CHECK(probes.size() == 100);
  const SandwichAudit audit = pot_rsquared_audit(V, rho, probes, 4.0);
  CHECK(audit.audited == 100);
  CHECK(audit.pass);
  CHECK(audit.max_upper <= 1.0);
  CHECK(audit.min_lower >= 1.0);
  // The bisection bracket is tight, so rho^2 sup sits just below 1 everywhere.
  CHECK(audit.max_upper == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("radius axiom constant") {
  const RadiusField cf = RadiusField::constant(2, 0.5);
  const auto cpairs = sample_axiom_pairs(cf, Box::cube(2, 2.0), 4);
  CHECK_FALSE(cpairs.empty());
  CHECK(radius_axiom_constant(cf, cpairs).c_hat == Approx(1.0).epsilon(1e-12));

  const RadiusField rho = quartic_rho();
  const auto pairs = sample_axiom_pairs(rho, Box::cube(2, 2.0), 5);
  const AxiomScan scan = radius_axiom_constant(rho, pairs);
  // Worst ratio near the origin approaches the golden ratio (y on the boundary of
  // B(0, rho(0))); the sampled scan stays within those brackets.
  CHECK(scan.c_hat >= 1.2);
  CHECK(scan.c_hat <= 1.7);

  const PotToRadFit fit = pot_to_rad_fit(rho, pairs);
  CHECK(fit.M >= 1);
  CHECK(fit.M <= 3);
  CHECK(fit.C < 10.0);
}

TEST_CASE("admissibility bounds the radius field") {
  const Weight w = make_weight(Family::radial_power, 1, {.m = 2});
  const RadiusField rho = quartic_rho();
  const auto probes = grid_points(Box::cube(2, 2.0), 7);
  // c = 1: the ball sup infimum over centers is attained at the origin, 16 * 1^2.
  const AdmBoundedAudit audit = adm_bounded_audit(rho, 1.0, 16.0, probes);
  CHECK(audit.pass);
  CHECK(audit.bound == Approx(1.0).epsilon(1e-12));
  CHECK(audit.max_rho == Approx(0.5).epsilon(1e-8));
}

TEST_CASE("bounded overlap covering") {
  const RadiusField rho = quartic_rho();
  const Covering cov = build_covering(rho, Box::cube(2, 1.5), 1.7);
  CHECK(cov.covers_all);
  CHECK(cov.overlap_K >= 1);
  CHECK(cov.overlap_K <= 100);
  CHECK(cov.centers.size() == cov.radii.size());
  CHECK(cov.rho_min > 0);
  for (double r : cov.radii) CHECK(r > 0);

  const Covering ccov = build_covering(RadiusField::constant(2, 0.5), Box::cube(2, 2.0), 1.0);
  CHECK(ccov.covers_all);
  CHECK(ccov.overlap_K >= 1);
}

TEST_CASE("profile table field") {
  const RadiusField tab = RadiusField::from_profile_table(2, {0.0, 1.0, 2.0}, {1.0, 2.0, 3.0});
  CHECK(tab.radial());
  CHECK(tab.provenance() == RadiusProvenance::table);
  CHECK(tab(Pt{0.5, 0}) == Approx(1.5).epsilon(1e-15));
  CHECK(tab(Pt{0, 1.5}) == Approx(2.5).epsilon(1e-15));
  CHECK(tab(Pt{3, 4}) == Approx(3.0).epsilon(1e-15));  // constant beyond the last sample
  CHECK(tab.profile(0.25) == Approx(1.25).epsilon(1e-15));

  CHECK_THROWS_AS(RadiusField::from_profile_table(2, {1.0, 0.0}, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(RadiusField::from_profile_table(2, {0.0, 1.0}, {1.0, -1.0}), Error);
  CHECK_THROWS_AS(RadiusField::from_profile_table(2, {0.0}, {}), Error);
}

TEST_CASE("scaled and max combinators") {
  const RadiusField rho = quartic_rho();
  const RadiusField half = RadiusField::scaled(rho, 0.5);
  CHECK(half.provenance() == RadiusProvenance::scaled);
  CHECK(half(Pt{1, 0}) == Approx(0.5 * rho(Pt{1, 0})).epsilon(1e-14));

  const RadiusField floor = RadiusField::constant(2, 0.3);
  const RadiusField m = RadiusField::max_of(rho, floor);
  CHECK(m.provenance() == RadiusProvenance::max_of_two);
  CHECK(m(Pt{0, 0}) == Approx(0.5).epsilon(1e-8));      // rho wins at the origin
  CHECK(m(Pt{2, 0}) == Approx(0.3).epsilon(1e-12));     // floor wins far out
  CHECK_THROWS_AS(RadiusField::max_of(rho, RadiusField::constant(4, 1.0)), Error);
  CHECK_THROWS_AS(RadiusField::scaled(rho, -2.0), Error);
}
