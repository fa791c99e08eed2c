#include "gwv/field.hpp"

#include <algorithm>
#include <cmath>

#include "gwv/error.hpp"
#include "gwv/kernels.hpp"
#include "gwv/parallel.hpp"

namespace gwv {

GridSpec GridSpec::centered_square(double half, int n) {
  GridSpec g;
  g.nx = n;
  g.ny = n;
  g.h = 2.0 * half / (n - 1);
  g.origin = {-half, -half};
  return g;
}

double ScalarField::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

double ScalarField::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

ScalarField ScalarField::from_function(const GridSpec& g,
                                       const std::function<double(Vec2)>& f) {
  ScalarField u;
  u.grid = g;
  u.values.resize(g.count());
  u.cell_weight.assign(g.count(), 1.0);
  parallel_for(g.count(), [&](std::size_t k) {
    int i = static_cast<int>(k) % g.nx;
    int j = static_cast<int>(k) / g.nx;
    u.values[k] = f(g.pos(i, j));
  });
  for (double v : u.values) require(std::isfinite(v), "field values must be finite");
  return u;
}

void ScalarField::set_mask(const std::function<bool(Vec2)>& inside, int subsamples) {
  const int s = std::max(1, subsamples);
  parallel_for(grid.count(), [&](std::size_t k) {
    int i = static_cast<int>(k) % grid.nx;
    int j = static_cast<int>(k) / grid.nx;
    Vec2 c = grid.pos(i, j);
    int hits = 0;
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) {
        Vec2 q{c.x + grid.h * ((a + 0.5) / s - 0.5), c.y + grid.h * ((b + 0.5) / s - 0.5)};
        if (inside(q)) ++hits;
      }
    }
    cell_weight[k] = static_cast<double>(hits) / (s * s);
  });
}

std::vector<Vec2> gradient_field(const ScalarField& u) {
  const GridSpec& g = u.grid;
  std::vector<Vec2> grad(g.count());
  const double inv2h = 1.0 / (2.0 * g.h);
  const double invh = 1.0 / g.h;
  parallel_for(g.count(), [&](std::size_t k) {
    int i = static_cast<int>(k) % g.nx;
    int j = static_cast<int>(k) / g.nx;
    double gx, gy;
    if (i == 0)
      gx = (u.at(1, j) - u.at(0, j)) * invh;
    else if (i == g.nx - 1)
      gx = (u.at(g.nx - 1, j) - u.at(g.nx - 2, j)) * invh;
    else
      gx = (u.at(i + 1, j) - u.at(i - 1, j)) * inv2h;
    if (j == 0)
      gy = (u.at(i, 1) - u.at(i, 0)) * invh;
    else if (j == g.ny - 1)
      gy = (u.at(i, g.ny - 1) - u.at(i, g.ny - 2)) * invh;
    else
      gy = (u.at(i, j + 1) - u.at(i, j - 1)) * inv2h;
    grad[k] = {gx, gy};
  });
  return grad;
}

double gradient_floor(const ScalarField& u, const std::vector<Vec2>& grad) {
  double gmax = 0.0;
  for (const Vec2& g : grad) gmax = std::max(gmax, g.norm());
  return u.gradient_floor_rel * gmax;
}

std::vector<double> curvature_divergence(const ScalarField& u) {
  const GridSpec& g = u.grid;
  const std::vector<Vec2> grad = gradient_field(u);
  const double eps = gradient_floor(u, grad);

  std::vector<Vec2> n(g.count());
  parallel_for(g.count(), [&](std::size_t k) {
    double m = grad[k].norm();
    n[k] = m >= eps && m > 0.0 ? grad[k] / m : Vec2{0.0, 0.0};
  });

  std::vector<double> kappa(g.count(), 0.0);
  const double inv2h = 1.0 / (2.0 * g.h);
  parallel_for(g.count(), [&](std::size_t k) {
    int i = static_cast<int>(k) % g.nx;
    int j = static_cast<int>(k) / g.nx;
    if (i == 0 || i == g.nx - 1 || j == 0 || j == g.ny - 1) return;
    if (n[k].norm2() == 0.0) return;  // floored cell, convention: contributes 0
    double div = (n[g.idx(i + 1, j)].x - n[g.idx(i - 1, j)].x) * inv2h +
                 (n[g.idx(i, j + 1)].y - n[g.idx(i, j - 1)].y) * inv2h;
    kappa[k] = div;
  });
  return kappa;
}

double f_energy(const ScalarField& u, double p) {
  require(p > 1.0, "exponent must exceed 1");
  const GridSpec& g = u.grid;
  const std::vector<Vec2> grad = gradient_field(u);
  const double eps = gradient_floor(u, grad);
  const std::vector<double> kappa = curvature_divergence(u);

  const double h2 = g.h * g.h;
  std::vector<double> terms(g.count(), 0.0);
  parallel_for(g.count(), [&](std::size_t k) {
    double m = grad[k].norm();
    if (m < eps || m == 0.0) return;
    terms[k] = u.cell_weight[k] * h2 * m * (1.0 + std::pow(std::abs(kappa[k]), p));
  });
  return kernels::reduce_pairwise(terms);
}

}  // namespace gwv
