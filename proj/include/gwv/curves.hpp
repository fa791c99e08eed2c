#pragma once

#include <optional>
#include <vector>

#include "gwv/vec2.hpp"

namespace gwv {

// Closed curve sampled at uniform arclength. `length` is N * spacing; the
// curve wraps from the last sample back to the first. Limit-system pieces
// (doubled ghost segments, compensated crossings) may carry analytic
// curvature vectors; second differences would otherwise see the measure-zero
// cusp artifacts of those configurations.
struct ClosedCurve {
  std::vector<Vec2> samples;
  double length = 0.0;
  int multiplicity = 1;
  std::optional<std::vector<Vec2>> analytic_curvature;

  std::size_t size() const { return samples.size(); }
  double spacing() const { return length / static_cast<double>(samples.size()); }
  // max relative deviation of consecutive sample distances from their mean
  double uniformity_defect() const;
};

struct CurveSystem {
  std::vector<ClosedCurve> curves;

  bool empty() const { return curves.empty(); }
  double trace_distance(Vec2 x) const;  // distance to the union of traces
  double diameter() const;
};

struct LevelFamily {
  std::vector<double> levels;  // strictly increasing
  std::vector<CurveSystem> systems;
};

struct ContactTolerances {
  double contact = 0.0;          // 0 means 1e-3 * diameter
  double tangency_deg = 2.0;
};

// Uniform-arclength resampling: linear interpolation to N samples, two
// smoothing passes, uniform re-resampling, then a similarity rescale about
// the centroid that restores the input polyline length exactly.
ClosedCurve resample_arclength(const std::vector<Vec2>& polyline, int n, int multiplicity = 1);

// Periodic central second difference of the samples; for uniform-arclength
// curves this is the curvature vector k = gamma''.
std::vector<Vec2> curvature(const ClosedCurve& c);

double willmore_energy(const ClosedCurve& c, double p);
double willmore_energy(const CurveSystem& gamma, double p);

// Parity of the multiplicity-weighted winding index; throws if x lies on the
// trace (within tolerance).
int interior_indicator(const CurveSystem& gamma, Vec2 x, double on_trace_tol = 0.0);

struct NestednessReport {
  bool no_crossing = true;        // (i)
  bool interiors_nested = true;   // (ii)
  bool ghost_condition = true;    // (iii)
  int crossing_count = 0;
  int inclusion_violations = 0;
  double worst_ghost_fraction = 0.0;
  bool all_passed() const { return no_crossing && interiors_nested && ghost_condition; }
};

NestednessReport nestedness_check(const LevelFamily& phi, const std::vector<Vec2>& probes,
                                  ContactTolerances tol = {});

// G(Phi) = integral over levels of the Willmore energy, trapezoid in t.
double level_energy(const LevelFamily& phi, double p);

// trapezoid weights for a strictly increasing level grid
std::vector<double> trapezoid_weights(const std::vector<double>& levels);

// sample constructors used by scenes and tests
ClosedCurve make_circle(Vec2 center, double radius, int n, int multiplicity = 1);
// axis-aligned rectangle outline as a polyline (counterclockwise)
std::vector<Vec2> rectangle_polyline(Vec2 lo, Vec2 hi, int per_side);

}  // namespace gwv
