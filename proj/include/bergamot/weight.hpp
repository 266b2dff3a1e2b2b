#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <bergamot/geometry.hpp>

namespace bergamot {

using cd = std::complex<double>;

enum class Family { fock, radial_power, gamma_monomials, decoupled, custom_radial };

Family family_from_name(const std::string& name);
std::string family_name(Family f);

struct WeightParams {
  int m = 2;                                 // radial_power exponent
  std::vector<std::array<int, 2>> gamma;     // gamma_monomials exponents (n=2)
  std::vector<double> coeffs;                // gamma / decoupled / custom_radial coefficients
  std::vector<int> powers;                   // decoupled per-variable powers
};

// Polynomial in s_j = |z_j|^2; every built-in family reduces to this form, which gives
// closed-form dbar-derivatives: d phi/dz_j = conj(z_j) P_j(s), H_jk = delta_jk P_j + conj(z_j) z_k P_jk.
struct SPoly {
  struct Term {
    double c;
    int e[2];
  };
  int nvars = 1;
  std::vector<Term> terms;

  double eval(const double* s) const;
  SPoly deriv(int j) const;
};

// Scalar potential field with a sup-over-euclidean-balls oracle. Radial nondecreasing
// profiles give the exact sup (attained at the far boundary point |x|+r); everything else
// falls back to a deterministic low-discrepancy sample of 64*(2n)^2 points plus the center.
struct Potential {
  int dim = 2;
  std::function<double(std::span<const double>)> eval;
  bool exact_radial = false;
  std::function<double(double)> profile;  // value at euclidean radius t; set iff exact_radial

  double sup_ball(std::span<const double> center, double r) const;
  static Potential constant(int dim, double value);
};

class Weight {
 public:
  int n() const { return n_; }
  int real_dim() const { return 2 * n_; }
  Family family() const { return family_; }
  const WeightParams& params() const { return params_; }

  double phi(std::span<const double> z) const;
  double phi_s(std::span<const double> s) const;                  // phi as a function of s_j = |z_j|^2
  void grad(std::span<const double> z, double* out) const;        // length 2n
  void hessian(std::span<const double> z, cd* out) const;         // n*n row-major, H[j][k]
  double laplacian(std::span<const double> z) const;              // 4 tr H
  double hessian_min_eigenvalue(std::span<const double> z) const;

  // phi depends on |z|^2 alone; profile evaluators below are then exact.
  bool radial() const { return !radial_coeffs_.empty(); }
  double phi_profile(double t) const;        // phi at euclidean radius t
  double laplacian_profile(double t) const;  // laplacian at euclidean radius t

  Potential laplacian_potential() const;

 private:
  friend Weight make_weight(Family, int, const WeightParams&);
  Family family_ = Family::fock;
  int n_ = 1;
  WeightParams params_;
  SPoly P_;
  std::vector<SPoly> Pj_;                 // dP/ds_j
  std::vector<std::vector<SPoly>> Pjk_;   // d2P/ds_j ds_k
  std::vector<double> radial_coeffs_;     // phi = sum c_k t^k in t = |z|^2, when radial
};

// Validates parameters, construction rejects non-plurisubharmonic weights via a
// minimum-eigenvalue probe of H on a coarse grid (offending point in the message).
Weight make_weight(Family family, int n, const WeightParams& params = {});
Weight make_weight_json(const std::string& spec_json);
std::string weight_spec_json(const Weight& w);

// --- hypothesis scans ------------------------------------------------------------

struct ProbeOptions {
  Box box;
  int per_axis = 0;
  int ball_centers_per_axis = 0;
  std::vector<double> radii;
  double admissibility_c = 1.0;
  static ProbeOptions defaults(int n);
};

struct ComparabilityScan {
  double delta_hat = 0;
  Pt argmin;
  int skipped = 0;  // probes with vanishing laplacian, excluded from the min
};
// min over probes of lambda_min(H)/laplacian; probes with laplacian = 0 are skipped
// and counted. All probes skipped is a distinct error (comparability undefined).
ComparabilityScan comparability_delta(const Weight& w, const std::vector<Pt>& probes);

struct DoublingScan {
  double D_hat = 1;
  Pt arg_center;
  double arg_r = 0;
};
DoublingScan doubling_constant(const Potential& V, const std::vector<Pt>& centers,
                               const std::vector<double>& radii);

struct ReverseHolderScan {
  double A_hat = 0;  // max of sup * r^{2n} / integral over the ball
  Pt arg_center;
  double arg_r = 0;
  bool finite = true;
};
ReverseHolderScan reverse_holder_constant(const Weight& w, const std::vector<Pt>& centers,
                                          const std::vector<double>& radii);

struct AdmissibilityScan {
  double c = 1;
  double inf_sup = 0;  // inf over centers of sup_{B(x,c)} laplacian
  Pt arg_center;
  double D_hat = 1;
  bool admissible = false;
};
AdmissibilityScan admissibility_check(const Weight& w, double c, const std::vector<Pt>& centers,
                                      const std::vector<double>& radii);

struct HypothesisReport {
  int n = 1;
  std::string family;
  std::string sup_mode;  // "exact-radial" or "sampled"
  ComparabilityScan comparability;
  DoublingScan doubling;
  ReverseHolderScan reverse_holder;
  AdmissibilityScan admissibility;
  bool gate_open = false;
  std::vector<std::string> notes;  // degenerate-scan diagnoses (e.g. vanishing laplacian)
};
// Composes the scans above; degenerate sub-scans close the gate with a note instead
// of propagating, so callers always get a report.
HypothesisReport hypothesis_scan(const Weight& w, const ProbeOptions& opts);

}  // namespace bergamot
