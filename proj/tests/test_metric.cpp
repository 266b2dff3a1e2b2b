#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <bergamot/metric.hpp>
#include <bergamot/radius.hpp>
#include <bergamot/weight.hpp>

using namespace bergamot;
using doctest::Approx;

namespace {

RadiusField quartic_rho() {
  return RadiusField::from_potential(
      make_weight(Family::radial_power, 1, {.m = 2}).laplacian_potential());
}

// Radial distance for V = 16|z|^2: 1/rho = 2(sqrt(x^2+1)+x), so
// d(0, q e1) = q^2 + q sqrt(q^2+1) + asinh(q).
double quartic_D(double q) { return q * q + q * std::sqrt(q * q + 1) + std::asinh(q); }

}  // namespace

TEST_CASE("radial distance closed form") {
  const RadiusField rho = quartic_rho();
  CHECK(distance_radial(rho, Pt{2, 0}) == Approx(9.91577143017838974).epsilon(1e-9));
  CHECK(distance_radial(rho, Pt{0, 1}) == Approx(quartic_D(1.0)).epsilon(1e-9));
  CHECK(distance_radial(rho, Pt{0.6, 0.8}) == Approx(quartic_D(1.0)).epsilon(1e-9));

  const PairDistance pd = metric_distance(rho, Pt{0, 0}, Pt{2, 0});
  CHECK(pd.d == Approx(9.91577143017838974).epsilon(1e-9));
  CHECK(pd.method == "radial-quadrature");
}

TEST_CASE("common-ray pairs reduce to profile differences") {
  const RadiusField rho = quartic_rho();
  const PairDistance same = metric_distance(rho, Pt{1, 0}, Pt{2, 0});
  CHECK(same.method == "radial-quadrature");
  CHECK(same.d == Approx(quartic_D(2.0) - quartic_D(1.0)).epsilon(1e-9));

  // Opposite rays: the chord passes through the origin, so the segment value
  // splits into two radial legs. The kink at the origin limits quadrature order.
  const PairDistance opp = metric_distance(rho, Pt{-1, 0}, Pt{2, 0});
  CHECK(opp.method == "segment-quadrature");
  CHECK(opp.d == Approx(quartic_D(2.0) + quartic_D(1.0)).epsilon(1e-6));
}

TEST_CASE("segment distances are symmetric and dominate radial differences") {
  const RadiusField rho = quartic_rho();
  const PairDistance ab = metric_distance(rho, Pt{0, 1}, Pt{1, 1});
  const PairDistance ba = metric_distance(rho, Pt{1, 1}, Pt{0, 1});
  CHECK(ab.method == "segment-quadrature");
  CHECK(ab.d == Approx(ba.d).epsilon(1e-12));
  const double lower =
      std::abs(distance_radial(rho, Pt{1, 1}) - distance_radial(rho, Pt{0, 1}));
  CHECK(ab.d >= lower - 1e-9);
}

TEST_CASE("constant field distances are euclidean over rho") {
  const RadiusField c = RadiusField::constant(2, 0.5);
  CHECK(metric_distance(c, Pt{0.3, 0.4}, Pt{-1.2, 0.7}).d ==
        Approx(2 * dist(Pt{0.3, 0.4}, Pt{-1.2, 0.7})).epsilon(1e-12));
  CHECK(metric_distance(c, Pt{0, 0}, Pt{1.5, 0}).d == Approx(3.0).epsilon(1e-12));
}

TEST_CASE("grid distances track the radial reduction within 3 percent") {
  // Along stencil rays the direction quantization vanishes and only the
  // edge-sampling error remains; off-ray nodes carry the budgeted 8.3%
  // anisotropy, which the constant-field case pins down separately.
  const RadiusField rho = quartic_rho();
  const Box box = Box::cube(2, 1.0);
  const MetricGrid g = make_metric_grid(rho, box, 0.02);
  const DistanceField df = distance_grid(g, Pt{0, 0});
  double worst = 0;
  int audited = 0;
  for (long i = 0; i < g.nodes(); ++i) {
    const Pt p = g.point_of(i);
    if (norm(p) < 0.3) continue;
    const double ax = std::abs(p[0]), ay = std::abs(p[1]);
    const bool on_ray = ax < 1e-12 || ay < 1e-12 || std::abs(ax - ay) < 1e-12;
    if (!on_ray) continue;
    const double exact = distance_radial(rho, p);
    worst = std::max(worst, std::abs(df.d[i] / exact - 1.0));
    ++audited;
  }
  CHECK(audited > 100);
  CHECK(worst <= 0.03);
}

TEST_CASE("constant-field grid distances stay within the stencil distortion") {
  const RadiusField c = RadiusField::constant(2, 0.5);
  const Box box = Box::cube(2, 1.0);
  const MetricGrid g = make_metric_grid(c, box, 0.1);
  const DistanceField df = distance_grid(g, Pt{0, 0});
  double lo = 10, hi = 0;
  for (long i = 0; i < g.nodes(); ++i) {
    const Pt p = g.point_of(i);
    if (norm(p) < 0.3) continue;
    const double ratio = df.d[i] / (2 * norm(p));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo >= 1.0 - 1e-9);  // graph paths are measured exactly, never shortcuts
  CHECK(hi <= stencil_distortion(2) + 1e-6);
}

TEST_CASE("metric ball sandwich audit has no violations") {
  const RadiusField rho = quartic_rho();
  const MetricGrid g = make_metric_grid(rho, Box::cube(2, 1.0), 0.02);
  const DistanceField df = distance_grid(g, Pt{0.5, 0});
  const SandwichReport rep = ball_sandwich_audit(g, df, rho, Pt{0.5, 0}, 0.3, 1.7);
  CHECK(rep.inner_checked > 0);
  CHECK(rep.outer_checked > 0);
  CHECK(rep.inner_violations == 0);
  CHECK(rep.outer_violations == 0);

  const RadiusField c = RadiusField::constant(2, 0.5);
  const MetricGrid gc = make_metric_grid(c, Box::cube(2, 1.0), 0.1);
  const DistanceField dfc = distance_grid(gc, Pt{0.3, 0.3});
  const SandwichReport repc = ball_sandwich_audit(gc, dfc, c, Pt{0.3, 0.3}, 0.5, 1.0);
  CHECK(repc.inner_violations == 0);
  CHECK(repc.outer_violations == 0);
}

TEST_CASE("distance fields are Lipschitz against rho") {
  const RadiusField c = RadiusField::constant(2, 0.5);
  const MetricGrid gc = make_metric_grid(c, Box::cube(2, 1.0), 0.1);
  const DistanceField dfc = distance_grid(gc, Pt{0, 0});
  const LipschitzReport lc = lipschitz_audit(gc, dfc, c);
  CHECK(lc.max_product <= stencil_distortion(2) + 1e-6);
  CHECK(lc.max_product >= 0.9);

  const RadiusField rho = quartic_rho();
  const MetricGrid g = make_metric_grid(rho, Box::cube(2, 1.0), 0.02);
  const DistanceField df = distance_grid(g, Pt{0, 0});
  const auto pairs = sample_axiom_pairs(rho, Box::cube(2, 1.0), 5);
  const double c_hat = radius_axiom_constant(rho, pairs).c_hat;
  const LipschitzReport lr = lipschitz_audit(g, df, rho);
  CHECK(lr.max_product <= c_hat * stencil_distortion(2) * 1.05);
}

TEST_CASE("refining the grid never increases distances") {
  // Edge weights average 1/rho at the endpoints and 1/rho is convex along
  // segments here, so halving h maps every coarse path to a cheaper fine path.
  const RadiusField rho = quartic_rho();
  const Box box = Box::cube(2, 1.0);
  const MetricGrid gc = make_metric_grid(rho, box, 0.025);
  const MetricGrid gf = make_metric_grid(rho, box, 0.0125);
  const DistanceField dc = distance_grid(gc, Pt{0, 0});
  const DistanceField dfine = distance_grid(gf, Pt{0, 0});
  for (long i = 0; i < gc.nodes(); ++i) {
    const Pt p = gc.point_of(i);
    CHECK(dfine.at(p) <= dc.d[i] + 1e-12);
  }
}

TEST_CASE("grid construction guards") {
  const RadiusField c = RadiusField::constant(2, 0.1);
  CHECK_THROWS_AS(make_metric_grid(c, Box::cube(2, 1.0), 0.1), Error);  // h > rho_min/4
  const RadiusField big = RadiusField::constant(2, 10.0);
  const MetricGrid g = make_metric_grid(big, Box::cube(2, 1.0), 0.5);
  CHECK(g.nodes() == 25);
  CHECK(g.rho_min == Approx(10.0));
  CHECK(g.index_of(Pt{0.5, -0.5}) >= 0);
  const Pt back = g.point_of(g.index_of(Pt{0.5, -0.5}));
  CHECK(back[0] == Approx(0.5));
  CHECK(back[1] == Approx(-0.5));
}
