#pragma once

#include <functional>
#include <vector>

#include "gwv/vec2.hpp"

namespace gwv {

// Node-centered rectangular grid: node (i, j) sits at origin + (i h, j h) and
// owns the h x h cell around it.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  Vec2 origin;
  double h = 0.0;

  std::size_t count() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  Vec2 pos(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
  bool operator==(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && origin.x == o.origin.x && origin.y == o.origin.y &&
           h == o.h;
  }
  // centered square grid spanning [-half, half]^2 with n nodes per axis
  static GridSpec centered_square(double half, int n);
};

// Grid sample of a (piecewise) smooth or BV function. `cell_weight` holds
// quadrature weights in [0, 1] (fractional on domain-boundary cells).
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;
  std::vector<double> cell_weight;
  double gradient_floor_rel = 1e-8;

  double at(int i, int j) const { return values[grid.idx(i, j)]; }
  double weight(int i, int j) const { return cell_weight[grid.idx(i, j)]; }
  double min_value() const;
  double max_value() const;

  static ScalarField from_function(const GridSpec& g, const std::function<double(Vec2)>& f);
  // fractional cell weights by sub-sampling the indicator on a k x k lattice
  void set_mask(const std::function<bool(Vec2)>& inside, int subsamples = 4);
};

// Central differences in the interior, one-sided on the grid edge.
std::vector<Vec2> gradient_field(const ScalarField& u);

// absolute gradient floor derived from gradient_floor_rel
double gradient_floor(const ScalarField& u, const std::vector<Vec2>& grad);

// F(u) = sum |grad u| (1 + |div(grad u / |grad u|)|^p) h^2 over cells, with
// zero contribution where |grad u| falls below the floor.
double f_energy(const ScalarField& u, double p);

// normalized-gradient divergence field (the level-line curvature kappa),
// zero where the gradient is floored
std::vector<double> curvature_divergence(const ScalarField& u);

}  // namespace gwv
