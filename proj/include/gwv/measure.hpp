#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gwv/vec2.hpp"

namespace gwv {

// Discrete carrier for a positive Radon measure on the closed ambient box:
// a weighted point cloud. Absolutely continuous parts are grid-cell clouds
// with weight = density * h^2; singular parts are curve/point samples.
struct ScalarParticle {
  Vec2 pos;
  double w = 0.0;
};

struct ParticleMeasure {
  std::vector<ScalarParticle> particles;
  bool closure_allowed = true;  // mass on the boundary of the box is permitted

  static ParticleMeasure from(std::vector<ScalarParticle> parts, bool closure = true);

  std::size_t size() const { return particles.size(); }
  void append(const ParticleMeasure& other);
  // sorts lexicographically by (x, y, w); all sums run over this fixed order
  void canonicalize();
};

struct VectorParticle {
  Vec2 pos;
  Vec2 w;
};

struct VectorParticleMeasure {
  std::vector<VectorParticle> particles;

  static VectorParticleMeasure from(std::vector<VectorParticle> parts);

  std::size_t size() const { return particles.size(); }
  void append(const VectorParticleMeasure& other);
  void canonicalize();
  double total_variation() const;
};

double total_mass(const ParticleMeasure& mu);

double pair(const ParticleMeasure& mu, const std::function<double(Vec2)>& g);
double pair(const VectorParticleMeasure& nu, const std::function<Vec2(Vec2)>& g);

// Integrand f(x, z) with linear growth, together with its recession function
// f_inf(x, z) on unit directions. Superlinear integrands carry the overflow
// sentinel instead: any singular mass then makes the functional +inf.
struct Integrand {
  std::function<double(Vec2, Vec2)> f;
  std::function<double(Vec2, Vec2)> f_inf;  // may be empty
  bool superlinear = false;                 // f_inf == +inf sentinel
  bool homogeneous = false;                 // f(x, s z) = s f(x, z) for s >= 0

  bool has_recession() const { return superlinear || static_cast<bool>(f_inf); }
  // max |f - f_inf| over unit vectors on a fixed sample set; 0 unless homogeneous
  double homogeneity_defect(const std::vector<Vec2>& sample_points) const;
};

// G(nu, mu) = int f(d nu/d mu) d mu + int f_inf(nu^s/|nu^s|) d|nu^s|.
// nu particles are matched to mu particles (exact skeleton positions first,
// else nearest neighbor within match_radius); unmatched nu mass and mass on
// zero-weight mu particles form the singular part.
double g_functional(const VectorParticleMeasure& nu, const ParticleMeasure& mu,
                    const Integrand& f, double match_radius);

struct RecessionReport {
  double max_deviation = 0.0;   // at the largest t
  bool no_linear_growth = false;
  std::vector<double> deviation_per_t;  // max over samples, one entry per t
};

RecessionReport recession_check(const Integrand& f, const std::vector<Vec2>& sample_points,
                                const std::vector<Vec2>& directions,
                                const std::vector<double>& t_values);

struct LscReport {
  std::vector<double> g_values;
  double g_limit = 0.0;
  bool liminf_ok = false;
  double tol = 0.0;
  // pairing residuals of the declared limit against witness integrands,
  // evaluated at the last sequence element (diagnostic only)
  std::vector<double> witness_residuals;
};

// Numerical probe of the semicontinuity G(nu, mu) <= liminf G(nu_h, mu_h).
// The weak-* limit pair is declared by the caller and not verified; the tail
// is the last half of the sequence.
LscReport lsc_probe(const std::vector<VectorParticleMeasure>& nu_h,
                    const std::vector<ParticleMeasure>& mu_h,
                    const VectorParticleMeasure& nu_limit, const ParticleMeasure& mu_limit,
                    const Integrand& f, double match_radius, double tol_scale = 1e-6);

}  // namespace gwv
