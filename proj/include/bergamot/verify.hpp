#pragma once

#include <string>
#include <utility>
#include <vector>

#include <bergamot/kernel.hpp>
#include <bergamot/metric.hpp>
#include <bergamot/radius.hpp>
#include <bergamot/weight.hpp>

namespace bergamot {

enum class KappaMode { rho, scaled, table };

struct KappaSpec {
  KappaMode mode = KappaMode::rho;
  double scale = 1.0;            // scaled mode: kappa = scale * rho
  std::vector<double> t, v;      // table mode: radial profile sample points
};

// Effective localization radius. The bound hypotheses need kappa >= rho, so wherever a
// user-supplied field dips below rho the harness substitutes max(kappa, rho) and flags
// the report; the substitution is never silent and never applies in plain rho mode.
struct KappaField {
  RadiusField raw;
  RadiusField eff;
  bool substituted_everywhere = false;  // scaled mode with factor < 1
};
KappaField make_kappa_field(const KappaSpec& spec, const RadiusField& rho);

struct PairRow {
  Pt z, w;
  double abs_k = 0;      // |K(z,w)|
  double tail = 0;       // kernel truncation tail estimate, relative
  bool tail_flag = false;
  double phi_z = 0, phi_w = 0;
  double rho_z = 0, rho_w = 0;
  double kappa_z = 0;    // effective field
  double d = 0;          // metric distance in the rho field
  std::string method;    // distance method tag
  double log_q = 0;      // log of the bound ratio Q
  double q = 0;          // exp(log_q); 0 on underflow
};

struct BoundReport {
  std::vector<PairRow> rows;  // every sampled pair, in sampler order
  double d_lo = 1.0, d_hi = 6.0;
  double eps_min = 0.05, log_margin = 0.5;
  int window_pairs = 0;       // rows inside the fit window after the underflow guard
  double slope = 0;
  double eps_hat = 0;         // -slope
  double log_c_hat = 0;       // fitted envelope intercept
  double max_resid = 0;       // max over window rows of log Q above the fitted line
  bool pass = false;
  bool kappa_substituted = false;
};

// Deterministic default pair set: anchors {0, 0.5, 1, 1.5, 2} e1 paired with themselves
// (on-diagonal rows first), then per anchor 8 ray directions with 8 targets equispaced
// in metric distance up to d_hi, each reached by bisection on the step length.
std::vector<std::pair<Pt, Pt>> default_pairs(const RadiusField& rho, int n, double d_hi);

// Samples Q(z,w) = |K| e^{-phi(z)-phi(w)} rho(z)^n rho(w)^n (rho(z)/kappa(z)) over the
// pairs and fits the exponential envelope: rows inside [d_lo, d_hi] are binned by
// distance (ten bins), the per-bin maximum of log Q is fitted by least squares, and the
// verdict is PASS iff slope <= -eps_min and no window row exceeds the line by more than
// log_margin. Rows with Q below 1e-300 are kept in the report but excluded from the fit.
// Distances are always measured in the rho field, so a vertical log-shift of Q (for
// instance kappa = c rho) leaves the fitted slope unchanged.
BoundReport verify_bound(const KernelModel& model, const RadiusField& rho,
                         const KappaSpec& kappa, const std::vector<std::pair<Pt, Pt>>& pairs,
                         double d_lo = 1.0, double d_hi = 6.0, double eps_min = 0.05,
                         double log_margin = 0.5);

// Hypothesis gate over the default probe set: comparability, doubling, reverse Holder,
// admissibility. Decay claims are guaranteed only when the gate is open; a closed
// gate downgrades any verify run to exploratory.
HypothesisReport hypothesis_gate(const Weight& w);

struct DecayReport {
  std::vector<double> d, log_v;  // points used in the fit
  double r0 = 1.5;
  double eps_hat = 0;
  double intercept = 0;
  double max_resid = 0;
  int used = 0;
};
// Log-linear fit of a max-modulus profile beyond r0; profile values below 1e-14 are
// excluded (underflow floor). The slope is invariant under scaling the datum.
DecayReport decay_report(const std::vector<double>& profile_d,
                         const std::vector<double>& profile_log_v, double r0 = 1.5);

}  // namespace bergamot
