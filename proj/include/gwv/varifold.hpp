#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gwv/curves.hpp"
#include "gwv/measure.hpp"
#include "gwv/young.hpp"

namespace gwv {

// Particle varifold on Omega x G(2,1): positions, line angles in [0, pi),
// positive weights, and optionally per-particle curvature vectors when the
// constructor knows them.
struct VarifoldParticle {
  Vec2 x;
  double theta = 0.0;
  double w = 0.0;
};

struct Varifold {
  std::vector<VarifoldParticle> particles;
  std::optional<std::vector<Vec2>> analytic_curvature;

  std::size_t size() const { return particles.size(); }
  double mass() const;
  Vec2 tangent(std::size_t k) const { return line_dir(particles[k].theta); }
};

// vector field with closed-form value and Jacobian (no differencing anywhere)
struct VectorField2 {
  std::function<Vec2(Vec2)> value;
  std::function<Mat2(Vec2)> jacobian;
};

// C^2 bump test field: X = (1 - r^2/R^2)^3 e_dir, compactly supported
struct TestField {
  Vec2 center;
  double radius = 1.0;
  int direction = 1;  // 1 or 2
};

VectorField2 as_field(const TestField& tf);

// delta V(X) = sum w_k t_k' (grad X)(x_k) t_k
double first_variation(const Varifold& v, const VectorField2& X);
double first_variation(const Varifold& v, const TestField& X);

ParticleMeasure weight_measure(const Varifold& v);

Varifold from_curve_system(const CurveSystem& gamma);
Varifold from_young(const YoungMeasure& nu);
Varifold from_level_family(const LevelFamily& phi);

// W(V) = sum w_k (1 + |H_k|^p); curvature from the override, else the
// analytic per-particle field, else an error.
double willmore(const Varifold& v, double p,
                const std::optional<std::vector<Vec2>>& h_override = std::nullopt);

// 2D Young-varifold pairing with a test function on Omega x G(2,1)
double pair_g1(const Varifold& v, const std::function<double(Vec2, double)>& f);

}  // namespace gwv
