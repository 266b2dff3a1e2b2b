#pragma once

#include <span>
#include <utility>
#include <vector>

#include <bergamot/radius.hpp>
#include <bergamot/weight.hpp>

namespace bergamot {

// Truncated orthogonal-monomial model of the reproducing kernel:
// K(z,w) = sum_{|alpha|<=N} z^alpha conj(w)^alpha / c_alpha with
// c_alpha = integral of |z^alpha|^2 e^{-2phi}. Coefficients are kept as logs and the
// evaluation runs in log space, so degrees in the hundreds stay representable.
class KernelModel {
 public:
  int n() const { return n_; }
  int degree() const { return degree_; }
  const Weight& weight() const { return weight_; }
  double log_coeff(int a, int b = 0) const;
  // Largest probe radius R (diagonal z=w=R*e1) whose tail estimate stays below the
  // tail threshold; evaluations beyond it carry the warning flag.
  double validated_radius() const { return validated_radius_; }
  static constexpr double tail_threshold = 1e-7;

 private:
  friend KernelModel build_kernel(const Weight&, int);
  int n_ = 1;
  int degree_ = 0;
  Weight weight_;
  std::vector<double> log_c_;  // degree-shell-major: shell s starts at s(s+1)/2 (n=2)
  double validated_radius_ = 0;
};

// Computes the coefficient table by adaptive radial quadrature in log space
// (1-D for n=1, Beta-reduced 1-D for radial n=2, nested 1-D for general n=2,
// per-variable product for decoupled weights). Divergent coefficients (weights
// growing too slowly) surface as a numerical error naming the offending alpha.
KernelModel build_kernel(const Weight& w, int degree);

struct KernelValue {
  cd K{0, 0};
  int degree = 0;
  double tail = 0;  // geometric tail estimate from the last two degree shells, relative
  bool tail_flag = false;
};
// Conjugate symmetry K(z,w) = conj K(w,z) holds exactly: swapping arguments conjugates
// every term and leaves all magnitudes and the summation order unchanged.
KernelValue eval_kernel(const KernelModel& m, std::span<const double> z,
                        std::span<const double> w);

// Max over probes of |h(z) - integral K(z,.) h e^{-2phi}| with honest 2-D quadrature
// (panelled radial nodes x uniform angular grid); h given by monomial coefficients (n=1).
double reproducing_audit(const KernelModel& m, const std::vector<cd>& h_coeffs,
                         const std::vector<Pt>& z_probes);

// Ratio of the truncated-span evaluation sup (closed form: sum |z^alpha|^2/c_alpha)
// to K(z,z); equals 1 up to rounding by the variational identity.
double diag_variational_ratio(const KernelModel& m, std::span<const double> z);

// Quadrature moment (z^a, z^b)_phi for n=1 weights; vanishes for a != b by rotation
// invariance (the angular grid sums the character exactly).
cd monomial_inner(const Weight& w, int a, int b);

// Max over samples (z, r<=rho(z)) of |h(z)|^2 e^{-2phi(z)} |B(z,r)| / integral_B |h|^2 e^{-2phi}.
struct SubMeanValueAudit {
  double c_hol = 0;
  Pt witness;
  double witness_r = 0;
};
SubMeanValueAudit submeanvalue_audit(const Weight& w, const RadiusField& rho,
                                     const std::vector<cd>& h_coeffs,
                                     const std::vector<std::pair<Pt, double>>& samples);

}  // namespace bergamot
