#pragma once

#include <span>
#include <string>
#include <vector>

#include <bergamot/radius.hpp>

namespace bergamot {

// d(0, z) = integral of 1/rho along the ray from the origin; exact for radial fields
// (geodesics from the origin of a conformal radial metric are rays, an assumption
// audited against the grid method in tests).
double distance_radial(const RadiusField& rho, std::span<const double> z);

struct PairDistance {
  double d = 0;
  std::string method;  // "radial-quadrature" or "segment-quadrature"
};
// Pairs on a common ray through the origin of a radial field use the exact 1-D
// reduction; all other pairs integrate 1/rho along the straight segment, which upper
// bounds the path infimum (the harsher direction for every decay test downstream).
PairDistance metric_distance(const RadiusField& rho, std::span<const double> x,
                             std::span<const double> y);

// Uniform node lattice with 1/rho tabulated; edges are the full diagonal stencil
// (8 neighbors in the plane, 3^d-1 moves in higher dimension), each weighted by
// euclidean length times the endpoint average of 1/rho.
struct MetricGrid {
  Box box;
  double h = 0.1;
  std::vector<int> shape;
  std::vector<double> inv_rho;
  double rho_min = 0;

  long nodes() const;
  long index_of(std::span<const double> p) const;  // nearest node; p must lie in the box
  Pt point_of(long idx) const;
};
// Audits h <= (min rho over nodes)/4 and the 2e7 node cap.
MetricGrid make_metric_grid(const RadiusField& rho, const Box& box, double h);

struct DistanceField {
  Box box;
  double h = 0.1;
  std::vector<int> shape;
  Pt source;
  std::vector<double> d;
  std::string method = "grid-dijkstra";

  long index_of(std::span<const double> p) const;
  double at(std::span<const double> p) const;
};
// Single-source shortest path (label-setting with deterministic tie order).
DistanceField distance_grid(const MetricGrid& g, std::span<const double> source);

// Worst-case euclidean distortion of the diagonal stencil: a unit segment at angle
// pi/8 to the nearest move direction costs 1/cos(pi/8) in graph length.
inline double stencil_distortion(int dim) { return dim <= 2 ? 1.0824 : 1.0824; }

// Checks both inclusions B_rho(x, r/C) <= B(x, r rho(x)) <= B_rho(x, C r) on the grid
// nodes, with tolerances h*sqrt(d) on euclidean radii and (distortion-1)*C*r + h/rho_min
// on metric radii (grid distances overestimate the continuum).
struct SandwichReport {
  int inner_checked = 0;
  int outer_checked = 0;
  int inner_violations = 0;
  int outer_violations = 0;
  double worst_inner = 0;  // largest euclidean excess beyond tolerance
  double worst_outer = 0;  // largest metric excess beyond tolerance
};
SandwichReport ball_sandwich_audit(const MetricGrid& g, const DistanceField& df,
                                   const RadiusField& rho, std::span<const double> x, double r,
                                   double c_hat);

// Max over grid edges of |d(a)-d(b)| / edge length * rho(edge midpoint); bounded by
// c_hat times the stencil distortion for fields satisfying the radius axiom.
struct LipschitzReport {
  double max_product = 0;
  Pt arg_mid;
};
LipschitzReport lipschitz_audit(const MetricGrid& g, const DistanceField& df,
                                const RadiusField& rho);

}  // namespace bergamot
