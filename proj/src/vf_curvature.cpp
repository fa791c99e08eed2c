#include "gwv/vf_curvature.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "gwv/error.hpp"
#include "gwv/kernels.hpp"

namespace gwv {

namespace {

struct HashGrid {
  double cell;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> bins;

  static std::int64_t key(int ix, int iy) {
    return static_cast<std::int64_t>(ix) * 73856093LL ^ static_cast<std::int64_t>(iy) * 19349663LL;
  }
  void build(const Varifold& v, double cell_size) {
    cell = cell_size;
    for (std::size_t k = 0; k < v.size(); ++k) {
      Vec2 p = v.particles[k].x;
      bins[key(static_cast<int>(std::floor(p.x / cell)),
               static_cast<int>(std::floor(p.y / cell)))].push_back(k);
    }
  }
  template <class Fn>
  void for_near(Vec2 p, double radius, Fn&& fn) const {
    int r = static_cast<int>(std::ceil(radius / cell));
    int cx = static_cast<int>(std::floor(p.x / cell));
    int cy = static_cast<int>(std::floor(p.y / cell));
    for (int dx = -r; dx <= r; ++dx) {
      for (int dy = -r; dy <= r; ++dy) {
        auto it = bins.find(key(cx + dx, cy + dy));
        if (it == bins.end()) continue;
        for (std::size_t k : it->second) fn(k);
      }
    }
  }
};

}  // namespace

double particle_spacing(const Varifold& v) {
  require(v.size() >= 2, "need at least 2 particles");
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& p : v.particles) {
    lo.x = std::min(lo.x, p.x.x);
    lo.y = std::min(lo.y, p.x.y);
    hi.x = std::max(hi.x, p.x.x);
    hi.y = std::max(hi.y, p.x.y);
  }
  double guess = std::max((hi - lo).norm(), 1e-12) / std::sqrt(static_cast<double>(v.size()));
  HashGrid grid;
  grid.build(v, std::max(guess, 1e-12));
  std::vector<double> nn(v.size(), 1e300);
  for (std::size_t k = 0; k < v.size(); ++k) {
    Vec2 p = v.particles[k].x;
    for (double radius = grid.cell; radius < 64.0 * grid.cell; radius *= 2.0) {
      grid.for_near(p, radius, [&](std::size_t l) {
        if (l == k) return;
        nn[k] = std::min(nn[k], (v.particles[l].x - p).norm());
      });
      if (nn[k] < 1e300) break;
    }
  }
  std::vector<double> finite;
  for (double d : nn)
    if (d < 1e300) finite.push_back(d);
  require(!finite.empty(), "could not estimate particle spacing");
  std::nth_element(finite.begin(), finite.begin() + finite.size() / 2, finite.end());
  return finite[finite.size() / 2];
}

CurvatureEstimate estimate_curvature(const Varifold& v, BatteryOptions battery, double reg) {
  const std::size_t n = v.size();
  require(n >= 4, "need at least 4 particles");
  const double ds = particle_spacing(v);
  const double spacing = battery.spacing > 0.0 ? battery.spacing : 4.0 * ds;
  const double radius = battery.radius_factor * spacing;

  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& p : v.particles) {
    lo.x = std::min(lo.x, p.x.x);
    lo.y = std::min(lo.y, p.x.y);
    hi.x = std::max(hi.x, p.x.x);
    hi.y = std::max(hi.y, p.x.y);
  }

  HashGrid grid;
  grid.build(v, radius);

  // bump lattice over the inflated bounding box; keep centers whose support
  // holds at least one particle
  std::vector<TestField> fields;
  std::vector<int> cover(n, 0);
  int nx = static_cast<int>(std::floor((hi.x - lo.x + 2.0 * radius) / spacing)) + 1;
  int ny = static_cast<int>(std::floor((hi.y - lo.y + 2.0 * radius) / spacing)) + 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Vec2 c{lo.x - radius + i * spacing, lo.y - radius + j * spacing};
      bool hit = false;
      grid.for_near(c, radius, [&](std::size_t k) {
        if ((v.particles[k].x - c).norm() < radius) {
          hit = true;
          ++cover[k];
        }
      });
      if (!hit) continue;
      fields.push_back({c, radius, 1});
      fields.push_back({c, radius, 2});
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    require(cover[k] >= 4, "underdetermined battery");

  // rows: dV(X_j) + sum_k w_k phi_j(x_k) H_k[dir] = 0
  const std::size_t rows = fields.size();
  std::vector<double> xs(n), ys(n), phi(n), gx(n), gy(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = v.particles[k].x.x;
    ys[k] = v.particles[k].x.y;
  }

  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> a_trips;
  Eigen::VectorXd b(rows);
  double a_fro2 = 0.0;
  for (std::size_t j = 0; j < rows; ++j) {
    const TestField& tf = fields[j];
    kernels::bump_batch(tf.center, tf.radius, xs, ys, phi, gx, gy);
    std::vector<double> dv_terms(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (phi[k] == 0.0 && gx[k] == 0.0 && gy[k] == 0.0) continue;
      Vec2 t = v.tangent(k);
      double td = tf.direction == 1 ? t.x : t.y;
      dv_terms[k] = v.particles[k].w * td * (gx[k] * t.x + gy[k] * t.y);
      double coef = v.particles[k].w * phi[k];
      if (coef != 0.0) {
        a_trips.emplace_back(static_cast<int>(j),
                             static_cast<int>(2 * k + (tf.direction - 1)), coef);
        a_fro2 += coef * coef;
      }
    }
    b(j) = -kernels::reduce_pairwise(dv_terms);
  }

  Eigen::SparseMatrix<double> A(rows, 2 * n);
  A.setFromTriplets(a_trips.begin(), a_trips.end());

  // neighborhood-mean regularizer rows: sqrt(w_k) (H_k - mean of neighbors)
  const double nb_radius = 3.0 * ds;
  HashGrid nb_grid;
  nb_grid.build(v, nb_radius);
  std::vector<Trip> r_trips;
  double r_fro2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    Vec2 p = v.particles[k].x;
    std::vector<std::pair<std::size_t, double>> nb;
    nb_grid.for_near(p, nb_radius, [&](std::size_t l) {
      if (l == k) return;
      double d = (v.particles[l].x - p).norm();
      if (d < nb_radius) nb.push_back({l, v.particles[l].w * (1.0 - d / nb_radius)});
    });
    std::sort(nb.begin(), nb.end());
    double wsum = 0.0;
    for (auto& [l, wl] : nb) wsum += wl;
    double sw = std::sqrt(v.particles[k].w);
    for (int d = 0; d < 2; ++d) {
      r_trips.emplace_back(static_cast<int>(2 * k + d), static_cast<int>(2 * k + d), sw);
      r_fro2 += sw * sw;
      if (wsum > 0.0) {
        for (auto& [l, wl] : nb) {
          double c = -sw * wl / wsum;
          r_trips.emplace_back(static_cast<int>(2 * k + d), static_cast<int>(2 * l + d), c);
          r_fro2 += c * c;
        }
      }
    }
  }
  Eigen::SparseMatrix<double> R(2 * n, 2 * n);
  R.setFromTriplets(r_trips.begin(), r_trips.end());

  // scale-free regularization weight
  const double tau = reg * (a_fro2 / std::max(1.0, r_fro2));

  Eigen::SparseMatrix<double> normal =
      Eigen::SparseMatrix<double>(A.transpose()) * A + tau * Eigen::SparseMatrix<double>(R.transpose()) * R;
  Eigen::VectorXd rhs = A.transpose() * b;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(normal);
  require(solver.info() == Eigen::Success, "curvature normal equations not SPD");
  Eigen::VectorXd h = solver.solve(rhs);

  CurvatureEstimate est;
  est.H.resize(n);
  for (std::size_t k = 0; k < n; ++k) est.H[k] = {h(2 * k), h(2 * k + 1)};
  Eigen::VectorXd res = A * h - b;
  est.residual = res.lpNorm<Eigen::Infinity>() / 2.0;  // sup|X| = 1 for bump fields
  est.reg = reg;
  est.battery_fields = static_cast<int>(rows);
  return est;
}

RatioProfile singular_ratio(const Varifold& v, Vec2 center,
                            const std::vector<double>& radii) {
  require(radii.size() >= 4, "need at least 4 radii");
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    require(radii[i] > radii[i + 1], "radii must decrease");

  const std::size_t n = v.size();
  std::vector<double> xs(n), ys(n), phi(n), gx(n), gy(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = v.particles[k].x.x;
    ys[k] = v.particles[k].x.y;
  }

  RatioProfile prof;
  prof.radii = radii;
  for (double r : radii) {
    double best = 0.0;
    for (double shrink : {1.0, 0.7, 0.45}) {
      kernels::bump_batch(center, shrink * r, xs, ys, phi, gx, gy);
      for (int m = 0; m < 8; ++m) {
        Vec2 d = line_dir(kPi * m / 8.0);
        std::vector<double> terms(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          if (gx[k] == 0.0 && gy[k] == 0.0) continue;
          Vec2 t = v.tangent(k);
          terms[k] = v.particles[k].w * d.dot(t) * (gx[k] * t.x + gy[k] * t.y);
        }
        best = std::max(best, std::abs(kernels::reduce_pairwise(terms)));
      }
    }
    std::vector<double> mass_terms;
    for (std::size_t k = 0; k < n; ++k)
      if ((v.particles[k].x - center).norm() < r) mass_terms.push_back(v.particles[k].w);
    double mass = kernels::reduce_pairwise(mass_terms);
    prof.dv_norm.push_back(best);
    prof.mass.push_back(mass);
    prof.ratio.push_back(mass > 0.0 ? best / mass : 0.0);
  }
  return prof;
}

}  // namespace gwv
