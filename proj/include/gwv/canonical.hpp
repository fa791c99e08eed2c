#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gwv/field.hpp"
#include "gwv/measure.hpp"
#include "gwv/young.hpp"

namespace gwv {

// One element of a generating sequence: the sampled field, the exact
// gradient evaluator, and any explicit jump curves.
struct GeneratedField {
  ScalarField u;
  std::function<Vec2(Vec2)> grad;
  std::vector<JumpCurve> jumps;
};

struct GeneratorSequence {
  GridSpec grid;
  double domain_radius = 1.0;  // Omega = B(0, R), masked on the grid
  std::function<GeneratedField(int)> builder;
  std::optional<YoungMeasure> declared_limit;
};

enum class CanonicalKind { oscillation, concentration, diffuse };

const char* canonical_name(CanonicalKind k);

// The three classical generating sequences (radial sawtooth, V-profile with
// unit jumps, rings of tents) together with their closed-form limit triplets
// in discrete form.
GeneratorSequence canonical_example(CanonicalKind kind, int grid_n);

GeneratedField canonical_field(CanonicalKind kind, int h, const GridSpec& grid);

struct BatteryTest {
  std::string name;
  Integrand f;
  bool homogeneous = false;
};

// 8 bounded tests (compact-support cutoff in z) + 8 positively 1-homogeneous
// directional tests
std::vector<BatteryTest> default_identify_battery();

struct IdentifyOptions {
  int subsamples = 4;     // per-cell quadrature for sequence moments
  int bump_cells = 16;    // hat bump half-width in grid cells
  double cutoff = 3.0;    // bounded-test cutoff scale
  double lambda_floor = 1e-9;
};

struct ConvergenceRow {
  std::string test;
  std::vector<double> values;
  bool converged = true;
};

struct IdentifyResult {
  YoungMeasure estimate;
  std::vector<ConvergenceRow> table;
  double du_mass_last = 0.0;
  std::vector<Vec2> bump_center;
  std::vector<double> bump_lambda;
  std::vector<double> bump_area;  // mask-weighted area under each hat bump
};

// Recovers the limit triplet from the sequence: per-cell moment matching for
// the oscillation part (at most two antipodal atoms plus delta_0), hat-bump
// localization with Aitken extrapolation for the concentration measure, and
// directional trigonometric moments for the angle atoms.
IdentifyResult identify_limit(const GeneratorSequence& seq, const std::vector<int>& h_schedule,
                              const std::vector<BatteryTest>& battery = default_identify_battery(),
                              IdentifyOptions opts = {});

// Willmore energy of the Young varifold of nu_{Du_h} with prescribed
// curvature field, by subsampled cell quadrature plus explicit jump terms.
double sequence_willmore(const GeneratedField& f, double domain_radius, double p,
                         const std::function<Vec2(Vec2)>& H, int subsamples = 4);

// |Du_h|(Omega) of a generated field by the same quadrature
double sequence_du_mass(const GeneratedField& f, double domain_radius, int subsamples = 4);

}  // namespace gwv
