#pragma once

#include <optional>
#include <vector>

#include "gwv/field.hpp"
#include "gwv/measure.hpp"

namespace gwv {

// oscillation atom: value z with probability p
struct AtomZ {
  Vec2 z;
  double p = 0.0;
};

// concentration-angle atom: unit direction d with probability q
struct AtomDir {
  Vec2 d;
  double q = 0.0;
};

// concentration particle with its own angular atom list
struct LambdaAtom {
  Vec2 pos;
  double w = 0.0;
  std::vector<AtomDir> dirs;
};

// Generalized Young measure triplet in discretized form: per-cell oscillation
// atoms, a concentration particle measure, and per-particle angular atoms.
struct YoungMeasure {
  GridSpec grid;
  std::vector<double> cell_weight;          // quadrature weights in [0, 1]
  std::vector<std::vector<AtomZ>> cells;    // one list per node cell
  std::vector<LambdaAtom> lambda;

  double lambda_mass() const;
  ParticleMeasure lambda_measure() const;
  // oscillation first moment: sum over cells of h^2 w sum p |z|
  double oscillation_moment() const;
  void validate() const;  // probabilities sum to 1, angular atoms unit

  static YoungMeasure zero(const GridSpec& g, std::vector<double> weights = {});
};

// << nu, f >> = oscillation double integral + concentration term with f_inf
double pairing(const YoungMeasure& nu, const Integrand& f);

VectorParticleMeasure barycenter(const YoungMeasure& nu);

// Jump curve with one-sided traces. The normal is the left of the travel
// direction; u_plus is the trace on that side.
struct JumpCurve {
  std::vector<Vec2> polyline;
  bool closed = true;
  double u_plus = 0.0;
  double u_minus = 0.0;
};

// nu_x = delta at the cell gradient (one-sided stencils across jumps),
// lambda = |u+ - u-| H^1 along the jump polylines, nu^inf = jump normal atom.
YoungMeasure from_bv(const ScalarField& u, const std::vector<JumpCurve>& jumps = {});

// Du as a vector particle measure: gradient cells plus jump particles. Shares
// the discretization of from_bv so barycenter comparisons are exact.
VectorParticleMeasure bv_derivative(const ScalarField& u,
                                    const std::vector<JumpCurve>& jumps = {});

// Pairing-additive sum; the second addend must have delta_0 oscillation parts
// (only such sums appear, and exactness requires f(x,0) = 0).
YoungMeasure add(const YoungMeasure& a, const YoungMeasure& b);

struct MembershipReport {
  bool moment_finite = false;
  double lambda_total = 0.0;
  double lambda_boundary_mass = 0.0;  // within a 2-cell band of the box edge
  bool boundary_ok = false;
  double barycenter_residual = 0.0;   // max pairing gap over the witness battery
  bool barycenter_ok = false;
  bool all_passed() const { return moment_finite && boundary_ok && barycenter_ok; }
};

MembershipReport gy_membership_report(const YoungMeasure& nu,
                                      const VectorParticleMeasure& du_ref,
                                      double tol = 1e-6);

}  // namespace gwv
