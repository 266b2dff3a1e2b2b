#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <bergamot/errors.hpp>
#include <bergamot/kernel.hpp>
#include <bergamot/verify.hpp>
#include <bergamot/weight.hpp>

using namespace bergamot;
using doctest::Approx;

namespace {

constexpr double kInvTwoPi = 0.15915494309189535;

const RadiusField& fock_rho() {
  static const RadiusField rho =
      RadiusField::from_potential(make_weight(Family::fock, 1).laplacian_potential());
  return rho;
}

const KernelModel& fock_model() {
  static const KernelModel m = build_kernel(make_weight(Family::fock, 1), 64);
  return m;
}

const std::vector<std::pair<Pt, Pt>>& fock_pairs() {
  static const auto pairs = default_pairs(fock_rho(), 1, 6.0);
  return pairs;
}

// Pairs along the real axis from the origin; d = 2t for the fock radius field.
std::vector<std::pair<Pt, Pt>> axis_pairs() {
  std::vector<std::pair<Pt, Pt>> pairs;
  for (double t = 0.6; t <= 3.001; t += 0.3) pairs.push_back({Pt{0, 0}, Pt{t, 0}});
  return pairs;
}

}  // namespace

TEST_CASE("default pair sampler layout") {
  const auto& pairs = fock_pairs();
  CHECK(pairs.size() == 325);
  for (int k = 0; k < 5; ++k) CHECK(pairs[k].first == pairs[k].second);
  CHECK(pairs[0].first == Pt{0, 0});
  CHECK(pairs[4].first == Pt{2, 0});
  // First off-diagonal pair: anchor 0, first direction, target d_hi/8.
  const auto dup = default_pairs(fock_rho(), 1, 6.0);
  for (size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].first == dup[i].first);
    CHECK(pairs[i].second == dup[i].second);
  }
  CHECK(metric_distance(fock_rho(), pairs[5].first, pairs[5].second).d ==
        Approx(0.75).epsilon(1e-6));
  CHECK(metric_distance(fock_rho(), pairs[12].first, pairs[12].second).d ==
        Approx(6.0).epsilon(1e-6));
}

TEST_CASE("fock envelope fit constants") {
  const BoundReport rep =
      verify_bound(fock_model(), fock_rho(), KappaSpec{}, fock_pairs());
  CHECK(rep.rows.size() == 325);
  CHECK(rep.window_pairs == 280);
  for (int k = 0; k < 5; ++k) {
    CHECK(rep.rows[k].d == 0.0);
    CHECK(rep.rows[k].q == Approx(kInvTwoPi).epsilon(1e-9));
  }
  // log Q = log(1/2pi) - d^2/4 on targets d = 1.5, 2.25, ..., 6:
  // envelope least squares gives slope -mean(d)/2 and peak residual var(d)/4.
  CHECK(rep.slope == Approx(-1.875).epsilon(1e-3));
  CHECK(rep.eps_hat == Approx(1.875).epsilon(1e-3));
  CHECK(rep.max_resid == Approx(0.5625).epsilon(1e-3));
  CHECK(rep.pass == false);  // slope passes, the quadratic bulge exceeds the margin
  CHECK_FALSE(rep.kappa_substituted);
  for (const PairRow& row : rep.rows) {
    CHECK((row.method == "radial-quadrature" || row.method == "segment-quadrature"));
    CHECK_FALSE(row.tail_flag);
  }
}

TEST_CASE("bound ratio is invariant under constant weight shifts") {
  const Weight shifted = make_weight(Family::custom_radial, 1, {.coeffs = {0.7, 1.0}});
  const KernelModel ms = build_kernel(shifted, 32);
  const KernelModel mf = build_kernel(make_weight(Family::fock, 1), 32);
  const RadiusField rho = RadiusField::from_potential(shifted.laplacian_potential());
  const auto pairs = axis_pairs();
  const BoundReport a = verify_bound(mf, rho, KappaSpec{}, pairs);
  const BoundReport b = verify_bound(ms, rho, KappaSpec{}, pairs);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i)
    CHECK(a.rows[i].log_q == Approx(b.rows[i].log_q).epsilon(1e-9).scale(1.0));
  CHECK(a.eps_hat == Approx(b.eps_hat).epsilon(1e-8));
}

TEST_CASE("kappa modes") {
  const auto& pairs = fock_pairs();
  const BoundReport base =
      verify_bound(fock_model(), fock_rho(), KappaSpec{}, pairs);

  KappaSpec twice;
  twice.mode = KappaMode::scaled;
  twice.scale = 2.0;
  const BoundReport big = verify_bound(fock_model(), fock_rho(), twice, pairs);
  CHECK_FALSE(big.kappa_substituted);
  for (size_t i = 0; i < base.rows.size(); ++i)
    CHECK(big.rows[i].log_q - base.rows[i].log_q ==
          Approx(-std::log(2.0)).epsilon(1e-12));
  // Distances live in the rho field, so the fitted decay rate is unchanged.
  CHECK(std::abs(big.eps_hat - base.eps_hat) <= 1e-9);
  CHECK(big.max_resid == Approx(base.max_resid).epsilon(1e-9));

  KappaSpec half;
  half.mode = KappaMode::scaled;
  half.scale = 0.5;
  const BoundReport sub = verify_bound(fock_model(), fock_rho(), half, pairs);
  CHECK(sub.kappa_substituted);  // kappa < rho everywhere, substituted by rho
  for (size_t i = 0; i < base.rows.size(); ++i) {
    CHECK(sub.rows[i].log_q == base.rows[i].log_q);
    CHECK(sub.rows[i].kappa_z == base.rows[i].rho_z);
  }

  KappaSpec low;
  low.mode = KappaMode::table;
  low.t = {0.0, 10.0};
  low.v = {0.3, 0.3};
  const BoundReport tlow = verify_bound(fock_model(), fock_rho(), low, pairs);
  CHECK(tlow.kappa_substituted);
  for (size_t i = 0; i < base.rows.size(); ++i)
    CHECK(tlow.rows[i].log_q == Approx(base.rows[i].log_q).epsilon(1e-12).scale(1.0));

  KappaSpec high;
  high.mode = KappaMode::table;
  high.t = {0.0, 10.0};
  high.v = {0.7, 0.7};
  const BoundReport thigh = verify_bound(fock_model(), fock_rho(), high, pairs);
  CHECK_FALSE(thigh.kappa_substituted);
  for (size_t i = 0; i < base.rows.size(); ++i)
    CHECK(thigh.rows[i].log_q - base.rows[i].log_q ==
          Approx(std::log(0.5 / 0.7)).epsilon(1e-7));

  KappaSpec bad;
  bad.mode = KappaMode::scaled;
  bad.scale = -1.0;
  CHECK_THROWS_AS(make_kappa_field(bad, fock_rho()), Error);
  KappaSpec empty;
  empty.mode = KappaMode::table;
  CHECK_THROWS_AS(make_kappa_field(empty, fock_rho()), Error);
}

TEST_CASE("bound ratio is symmetric in rho mode") {
  std::vector<std::pair<Pt, Pt>> mirrored;
  const std::vector<std::pair<Pt, Pt>> core = {
      {Pt{0, 0}, Pt{1, 0}},      {Pt{0.5, 0}, Pt{0.5, 1.2}}, {Pt{1, 0}, Pt{0, 1}},
      {Pt{0.3, 0.4}, Pt{-0.8, 0.8}}, {Pt{0, 0}, Pt{2.5, 0}},
  };
  for (const auto& [a, b] : core) {
    mirrored.push_back({a, b});
    mirrored.push_back({b, a});
  }
  const BoundReport rep = verify_bound(fock_model(), fock_rho(), KappaSpec{}, mirrored);
  for (size_t i = 0; i < mirrored.size(); i += 2) {
    CHECK(rep.rows[i].log_q ==
          Approx(rep.rows[i + 1].log_q).epsilon(1e-12).scale(1.0));
    CHECK(rep.rows[i].d == Approx(rep.rows[i + 1].d).epsilon(1e-12));
  }
}

TEST_CASE("verify guards") {
  const auto& pairs = fock_pairs();
  CHECK_THROWS_AS(
      verify_bound(fock_model(), fock_rho(), KappaSpec{}, pairs, 3.0, 2.0), Error);
  CHECK_THROWS_AS(
      verify_bound(fock_model(), fock_rho(), KappaSpec{}, pairs, 1.0, 6.0, -0.1), Error);
  CHECK_THROWS_AS(verify_bound(fock_model(), fock_rho(), KappaSpec{}, pairs, 1.0, 6.0,
                               0.05, 0.0),
                  Error);
  CHECK_THROWS_AS(verify_bound(fock_model(), RadiusField::constant(4, 0.5), KappaSpec{},
                               pairs),
                  Error);

  // Low-degree model: window rows carry tail flags.
  const KernelModel low = build_kernel(make_weight(Family::fock, 1), 4);
  bool threw = false;
  try {
    verify_bound(low, fock_rho(), KappaSpec{}, pairs);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == errc::numerical);
    CHECK(std::string(e.what()).find("raise the kernel degree") != std::string::npos);
  }
  CHECK(threw);

  // Only on-diagonal pairs: nothing lands in the window.
  const std::vector<std::pair<Pt, Pt>> diag(pairs.begin(), pairs.begin() + 5);
  bool few = false;
  try {
    verify_bound(fock_model(), fock_rho(), KappaSpec{}, diag);
  } catch (const Error& e) {
    few = true;
    CHECK(std::string(e.what()).find("fewer than 8") != std::string::npos);
  }
  CHECK(few);

  // All pairs at one distance: the envelope collapses to a single bin.
  const std::vector<std::pair<Pt, Pt>> rep10(10, {Pt{0, 0}, Pt{1, 0}});
  bool single = false;
  try {
    verify_bound(fock_model(), fock_rho(), KappaSpec{}, rep10);
  } catch (const Error& e) {
    single = true;
    CHECK(std::string(e.what()).find("single distance bin") != std::string::npos);
  }
  CHECK(single);
}

TEST_CASE("hypothesis gate") {
  const auto open2 = hypothesis_gate(make_weight(Family::fock, 2));
  CHECK(open2.gate_open);
  CHECK(open2.comparability.delta_hat == Approx(0.125).epsilon(1e-9));

  const auto quartic = hypothesis_gate(make_weight(Family::radial_power, 1, {.m = 2}));
  CHECK(quartic.gate_open);

  const auto dec =
      hypothesis_gate(make_weight(Family::decoupled, 2, {.coeffs = {1.0, 1.0}, .powers = {1, 2}}));
  CHECK_FALSE(dec.gate_open);
  CHECK(dec.comparability.delta_hat == 0.0);

  const auto flat = hypothesis_gate(make_weight(Family::custom_radial, 1, {.coeffs = {0.0}}));
  CHECK_FALSE(flat.gate_open);
  CHECK_FALSE(flat.notes.empty());
}

TEST_CASE("decay report fit") {
  std::vector<double> d, lv;
  for (int k = 1; k <= 10; ++k) {
    d.push_back(0.5 * k);
    lv.push_back(3.0 - 1.2 * 0.5 * k);
  }
  const DecayReport rep = decay_report(d, lv, 1.5);
  CHECK(rep.used == 8);
  CHECK(rep.eps_hat == Approx(1.2).epsilon(1e-12));
  CHECK(rep.intercept == Approx(3.0).epsilon(1e-12));
  CHECK(rep.max_resid <= 1e-12);

  std::vector<double> lv2 = lv;
  for (double& v : lv2) v += std::log(7.0);
  CHECK(decay_report(d, lv2, 1.5).eps_hat == Approx(1.2).epsilon(1e-12));

  // Underflow points are excluded from the fit.
  std::vector<double> d3 = d, lv3 = lv;
  d3.push_back(6.0);
  lv3.push_back(-40.0);
  const DecayReport rep3 = decay_report(d3, lv3, 1.5);
  CHECK(rep3.used == 8);
  CHECK(rep3.eps_hat == Approx(1.2).epsilon(1e-12));

  CHECK_THROWS_AS(decay_report({2.0, 3.0}, {0.0, -1.0}, 1.5), Error);
  CHECK_THROWS_AS(decay_report({1.0}, {0.0, 1.0}, 0.5), Error);
}
