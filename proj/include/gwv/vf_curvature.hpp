#pragma once

#include <vector>

#include "gwv/varifold.hpp"

namespace gwv {

struct CurvatureEstimate {
  std::vector<Vec2> H;
  double residual = 0.0;  // max over the battery of |dV(X) + sum w <X,H>| / (1 + sup|X|)
  double reg = 0.0;
  int battery_fields = 0;
};

struct BatteryOptions {
  double spacing = 0.0;        // bump lattice spacing; 0 means 4 x particle spacing
  double radius_factor = 2.2;  // bump radius relative to lattice spacing
};

// Regularized least-squares inversion of the first-variation identity:
// minimize sum_j |dV(X_j) + sum_k w_k <X_j(x_k), H_k>|^2
//          + reg * sum_k w_k |H_k - Hbar_k|^2
// where Hbar is the weighted neighborhood mean (radius 3 particle spacings).
CurvatureEstimate estimate_curvature(const Varifold& v, BatteryOptions battery = {},
                                     double reg = 1e-3);

// median nearest-neighbor distance between particles
double particle_spacing(const Varifold& v);

struct RatioProfile {
  std::vector<double> radii;
  std::vector<double> dv_norm;  // battery-sup estimate of |dV|(B_r), a lower bound
  std::vector<double> mass;     // mu_V(B_r)
  std::vector<double> ratio;
};

// |dV|(B_r) / mu_V(B_r) profile over decreasing radii; the first-variation
// norm is estimated by a sup over 8 directions x 3 bump profiles per ball.
RatioProfile singular_ratio(const Varifold& v, Vec2 center, const std::vector<double>& radii);

}  // namespace gwv
