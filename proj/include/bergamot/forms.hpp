#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <vector>

#include <bergamot/geometry.hpp>
#include <bergamot/radius.hpp>
#include <bergamot/weight.hpp>

namespace bergamot {

using SpMat = Eigen::SparseMatrix<cd>;
using Vec = Eigen::VectorXcd;

// Uniform grid on a box in R^{2n} with zero-Dirichlet interior unknowns. Difference
// rows are evaluated on the full node set (values outside the interior are zero), and
// every row carries the uniform cell weight h^{2n}, so the quadratic forms of a grid
// restrict exactly to those of any aligned subgrid.
struct FormGrid {
  Weight weight;
  Box box;
  double h = 0;
  int n = 1;                       // complex dimension; real dimension is 2n
  std::vector<int> shape;          // nodes per axis
  long nodes = 0;                  // full node count
  long interior = 0;               // unknowns per form component
  std::vector<long> int_of_node;   // node -> interior index, -1 on the boundary
  std::vector<long> node_of_int;   // interior index -> node
  std::vector<double> wgt;         // e^{-2 phi} h^{2n} per node

  Pt point_of(long node) const;
};

// Validates: box dimension 2n, extents multiples of h, at least 5 nodes per axis,
// at most 2e7 nodes, and 2 phi <= 690 at interior nodes (the exact weighted adjoint
// divides by the node weight, which must not underflow).
FormGrid make_form_grid(const Weight& w, const Box& box, double h);

// Sample a scalar (or n-component) function into an interior vector.
Vec interior_vector(const FormGrid& g, const std::function<cd(const Pt&)>& f);
Vec form_vector(const FormGrid& g, const std::function<cd(const Pt&, int)>& f);

// MKH assembly of the energy form on (0,1)-forms:
//   E[u] = sum_{j,k} ||dbar_k u_j||^2_phi + 2 integral (H u, u) e^{-2 phi}.
// A is the scalar first-order block (shared by every component), M the mass diagonal.
struct FormOperators {
  long m = 0;          // interior nodes
  int n = 1;           // form components
  SpMat A;             // m x m
  SpMat E;             // n m x n m
  Eigen::VectorXd M;   // m, weight at interior nodes (per component)
};
FormOperators assemble_mkh(const FormGrid& g);

// dbar on scalars, interior rows only: m -> n m.
SpMat assemble_dbar(const FormGrid& g);
// Exact weighted adjoint W_int^{-1} dbar^H W_all on (0,1)-forms: n m -> m. Satisfies
// (dbar_star g, v)_W = (g, dbar v)_W to rounding by construction and equals
// -del g + 2 (del phi) g + O(h^2) pointwise.
SpMat assemble_dbar_star(const FormGrid& g);
// Quadratic form of ||dbar u||^2 on (0,1)-forms (zero for n=1): n m x n m.
SpMat assemble_dbar2_form(const FormGrid& g);

// Zeroth-order matrix of the conjugated Schroedinger form: V = 8H - 4 tr(H) I_n,
// so tr V = (2-n) laplacian(phi).
void schrodinger_potential(const Weight& w, const Pt& z, cd* V);

// Scalar magnetic kinetic form (1/4) sum_k (D_k - i A_k)^H h^{2n} (D_k - i A_k) with
// A = grad-perp phi per complex variable (or A = 0 when magnetic is false): m x m.
SpMat assemble_kinetic(const FormGrid& g, bool magnetic);
// Full conjugated form: block-diagonal magnetic kinetic plus (1/4) V h^{2n}: n m x n m.
// Satisfies S[e^{-phi} u] = E[u] + O(h^2) for smooth compactly supported u.
SpMat assemble_schrodinger(const FormGrid& g);

// Deterministic smooth (0,1)-form trials: monomial-times-Gaussian profiles under a
// C-infinity radial cutoff that vanishes identically on the outer 10% of the box.
std::vector<Vec> margin_trials(const FormGrid& g, int count);

// Relative deviation |E[u] - (||dbar u||^2 + ||dbar* u||^2)| / E[u] over trials.
struct CrossAssemblyAudit {
  double max_rel_dev = 0;
  double mean_rel_dev = 0;
};
CrossAssemblyAudit cross_assembly_audit(const FormGrid& g, const FormOperators& ops,
                                        const std::vector<Vec>& trials);

// Relative deviation |E[u] - S[e^{-phi} u]| / E[u] over trials; requires every trial
// to vanish on the outer 10% margin of the box.
struct SchrodingerAudit {
  double max_rel_dev = 0;
};
SchrodingerAudit schrodinger_audit(const FormGrid& g, const FormOperators& ops,
                                   const std::vector<Vec>& trials);

// Counts trials where the free Dirichlet energy of |v| exceeds the magnetic energy of
// v = e^{-phi} u by more than a relative slack of 10 h (discrete Kato inequality).
int diamagnetic_violations(const FormGrid& g, const std::vector<Vec>& trials);

// Jacobi-preconditioned conjugate gradients, zero start, iteration cap 1e5.
struct CgResult {
  long iters = 0;
  double relres = 0;
};
CgResult cg_solve(const SpMat& A, const Vec& b, Vec& x, double tol = 1e-8,
                  long maxit = 100000);

// Smallest Rayleigh quotient of E against the mass form by inverse iteration from the
// all-ones start; refutes a proposed coercivity constant when the quotient dips below
// it, and never certifies more than the probed subspace shows.
struct CoercivityResult {
  double lambda = 0;
  int outer_iters = 0;
  long cg_iters = 0;
  double residual = 0;  // ||E x - lambda M x|| / ||M x||
};
CoercivityResult coercivity_rayleigh(const FormOperators& ops, double tol = 1e-8);

// C_FP = max over trials of integral rho^{-2} f^2 / (integral |grad f|^2 + V f^2),
// plain Lebesgue measure, real scalar trials.
struct FeffermanPhongResult {
  double c_fp = 0;
  int witness = -1;
};
FeffermanPhongResult fefferman_phong_constant(const FormGrid& g, const RadiusField& rho,
                                              const Potential& V,
                                              const std::vector<Eigen::VectorXd>& trials);

// |E[eta u] - ((1/4) integral |grad eta|^2 |u|^2 e^{-2 phi} + Re(eta Box u, eta u)_W)|
// relative to E[eta u]; Box u is the weak form M^{-1} E u. eta is real on all nodes.
double localization_deviation(const FormGrid& g, const FormOperators& ops, const Vec& u,
                              const std::vector<double>& eta);

// Canonical solution of dbar f = u (n=1): solve E g = M u weakly, f = dbar_star g.
// The decay profile bins max |f| e^{-phi} by the metric distance d = |w| / kappa from
// the origin (constant kappa), and eps_hat is minus the least-squares slope of the log
// profile over [d_lo, d_hi]. ortho_rel[k] = |(f, z^k)_W| / (||f|| ||z^k||), k = 0..deg.
struct CanonicalSolution {
  Vec g, f;
  long cg_iters = 0;
  double cg_relres = 0;
  std::vector<double> profile_d, profile_logv;  // all bins with nonzero mass
  double eps_hat = 0;
  std::vector<double> ortho_rel;
};
CanonicalSolution canonical_solution(const FormGrid& g, const FormOperators& ops,
                                     const Vec& datum, double kappa_const, double d_lo,
                                     double d_hi, int ortho_degree = 4);

// Bergman projection via the Neumann operator, B f = f - dbar_star N dbar f, compared
// against the monomial expansion sum_k (f, z^k) z^k / ||z^k||^2 on the inner quarter
// of the box; deviation is relative to the datum scale there (n=1).
struct NeumannBergmanAudit {
  double max_rel_dev = 0;
  Pt witness;
};
NeumannBergmanAudit neumann_bergman_audit(const FormGrid& g, const FormOperators& ops,
                                          const Vec& f, int basis_degree);

}  // namespace bergamot
