#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <bergamot/weight.hpp>

namespace bergamot {

enum class RadiusProvenance { from_potential, constant, scaled, max_of_two, table };
std::string provenance_name(RadiusProvenance p);

struct BisectOptions {
  double rmin = 1e-6;
  double rmax = 1e3;
  double reltol = 1e-10;
};

// Evaluable radius field rho(x) > 0. For from_potential fields rho(x) is the largest r
// with r^2 * sup_{B(x,r)} V <= 1, found by monotone bisection; the returned value is the
// lower bracket end, so rho(x)^2 * sup <= 1 holds exactly at the evaluated point.
class RadiusField {
 public:
  RadiusField() = default;

  double operator()(std::span<const double> x) const;
  int dim() const { return dim_; }
  RadiusProvenance provenance() const { return prov_; }

  // Comparability constant of the "approximately constant on own balls" axiom,
  // as last audited; 1 until audited (exact for constant fields).
  double c_hat() const { return c_hat_; }
  void set_c_hat(double c) { c_hat_ = c; }

  bool radial() const { return radial_; }
  double profile(double t) const;  // value at euclidean radius t; requires radial()

  static RadiusField from_potential(const Potential& V, BisectOptions opts = {});
  static RadiusField constant(int dim, double value);
  static RadiusField scaled(const RadiusField& base, double factor);
  static RadiusField max_of(const RadiusField& a, const RadiusField& b);
  // Radial piecewise-linear profile kappa(t) from sorted sample points (constant
  // beyond the last sample); entry path for user-supplied kappa tables.
  static RadiusField from_profile_table(int dim, std::vector<double> t, std::vector<double> v);

 private:
  int dim_ = 2;
  RadiusProvenance prov_ = RadiusProvenance::constant;
  std::function<double(std::span<const double>)> eval_;
  bool radial_ = false;
  std::function<double(double)> prof_;
  double c_hat_ = 1;
};

// Max over pairs of max(rho(x)/rho(y), rho(y)/rho(x)); precondition y in B(x, rho(x)).
struct AxiomScan {
  double c_hat = 1;
  std::pair<Pt, Pt> witness;
};
AxiomScan radius_axiom_constant(const RadiusField& rho,
                                const std::vector<std::pair<Pt, Pt>>& pairs);
// Deterministic pair sampler: grid centers x, 8 low-discrepancy offsets inside B(x, rho(x)).
std::vector<std::pair<Pt, Pt>> sample_axiom_pairs(const RadiusField& rho, const Box& box,
                                                  int centers_per_axis);

// Checks rho^{-2}/(4 D_hat) <= sup_{B(x,rho(x))} V <= rho^{-2} at each probe, reported as
// the f-values f = rho^2 * sup: upper <= 1, lower = 4 D_hat f >= 1.
struct SandwichAudit {
  int audited = 0;
  double max_upper = 0;  // max of rho^2 * sup   (expect <= 1)
  double min_lower = 0;  // min of 4 D_hat * rho^2 * sup (expect >= 1)
  Pt arg_upper, arg_lower;
  bool pass = false;
};
SandwichAudit pot_rsquared_audit(const Potential& V, const RadiusField& rho,
                                 const std::vector<Pt>& probes, double D_hat);

// Report-only two-sided polynomial comparability fit: smallest M in {1,2,3} with
// moderate C such that rho(y)/rho(x) lies within C * max(|x-y|/rho(x), 1)^{+-M}.
struct PotToRadFit {
  double C = 1;
  int M = 1;
  std::pair<Pt, Pt> witness;
};
PotToRadFit pot_to_rad_fit(const RadiusField& rho, const std::vector<std::pair<Pt, Pt>>& pairs);

// For admissible weights, rho is bounded by max(c, 1/sqrt(c_inf)): beyond radius c the
// ball sup is at least the admissibility infimum, which forces r^2 sup > 1.
struct AdmBoundedAudit {
  double bound = 0;
  double max_rho = 0;
  Pt arg_max;
  bool pass = false;
};
AdmBoundedAudit adm_bounded_audit(const RadiusField& rho, double c, double c_inf,
                                  const std::vector<Pt>& probes);

// Greedy bounded-overlap covering: candidates scanned in row-major order with spacing
// rho_min/4; a candidate is accepted when its shrunken ball (factor 1/(1+C^2)) is
// disjoint from all accepted shrunken balls. Full balls are then audited for coverage.
struct Covering {
  std::vector<Pt> centers;
  std::vector<double> radii;
  int overlap_K = 0;
  Box domain;
  double rho_min = 0;
  double shrink = 1;
  bool covers_all = false;
  int audit_points = 0;
  Pt uncovered_witness;
};
Covering build_covering(const RadiusField& rho, const Box& box, double c_hat);

}  // namespace bergamot
