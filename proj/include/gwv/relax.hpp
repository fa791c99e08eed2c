#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gwv/curves.hpp"
#include "gwv/field.hpp"
#include "gwv/levelset.hpp"
#include "gwv/varifold.hpp"
#include "gwv/vf_curvature.hpp"
#include "gwv/young.hpp"

namespace gwv {

struct CoareaReport {
  double f_direct = 0.0;
  double f_levels = 0.0;
  double gap_rel = 0.0;
  bool open_levels = false;  // scene policy violation was reported
  std::string note;
};

CoareaReport coarea_check(const ScalarField& u, double p, const std::vector<double>& t_grid,
                          LevelExtractOptions opts = {});

struct SmoothEqualityReport {
  double f_u = 0.0;
  double w_vnu = 0.0;
  double gap_rel = 0.0;
};

// builds nu_Du, the Young varifold, and the curvature field from u itself;
// shares the cell quadrature with f_energy
SmoothEqualityReport smooth_equality_check(const ScalarField& u, double p);

struct SistemaYoungResult {
  YoungMeasure nu;
  ParticleMeasure m;  // ghost trace + multiplicity excess, level-integrated
  double m_mass = 0.0;
  Varifold v;
  double g_phi = 0.0;
  double w_v = 0.0;
  double identity_gap_rel = 0.0;
};

// The dimension-2 representation construction: given an indicator field with
// its jump set and a level family covering it, build the Young measure of
// (YV2)/(m), its Young varifold, and both energies on the shared quadrature.
SistemaYoungResult sistema_young_build(const ScalarField& u,
                                       const std::vector<JumpCurve>& jumps,
                                       const LevelFamily& phi, double p,
                                       double match_tol = 0.0);

struct MinvuCandidate {
  std::string name;
  Varifold v;
  std::optional<YoungMeasure> nu;  // enables the membership report
  std::vector<Vec2> ratio_probes;
};

struct CandidateVerdict {
  std::string name;
  double w = 0.0;
  bool has_membership = false;
  MembershipReport membership;
  std::vector<RatioProfile> ratios;
  bool ratio_bounded = true;
};

struct MinvuReport {
  double fbar_estimate = 0.0;
  std::string fbar_provenance;
  std::vector<CandidateVerdict> candidates;
  double min_w = 0.0;
  std::string argmin;
  bool inequality_ok = false;
  double gap_rel = 0.0;  // (fbar - min W) / fbar
};

MinvuReport minvu_gap(double fbar_estimate, const std::string& provenance, double p,
                      const std::vector<MinvuCandidate>& candidates,
                      const VectorParticleMeasure& du_ref,
                      const std::vector<double>& ratio_radii, double tol = 1e-9);

// ---- counterexample geometry -----------------------------------------------

// segments-and-arcs path walker emitting uniform-arclength closed curves with
// analytic curvature (1/r on arcs, 0 on straights and compensated corners)
struct PathPiece {
  bool is_arc = false;
  Vec2 a, b;          // segment endpoints
  Vec2 center;        // arc data
  double r = 0.0, ang0 = 0.0, ang1 = 0.0;
};

ClosedCurve sample_path(const std::vector<PathPiece>& pieces, double target_ds,
                        int multiplicity = 1);

// three segments radiating from `junction`, as a unit-multiplicity varifold
Varifold segment_star(Vec2 junction, const std::vector<double>& angles_deg, double length,
                      double ds);

// doubled ghost segment a->b->a with zero analytic curvature
ClosedCurve ghost_segment(Vec2 a, Vec2 b, double target_ds);

// rounded square boundary; corners listed in `sharp` keep the exact corner
// (their crossing is compensated in the scenes that use them)
ClosedCurve rounded_square(Vec2 lo, Vec2 hi, double corner_radius, double target_ds,
                           const std::vector<int>& sharp_corners = {});

}  // namespace gwv
