#include "gwv/varifold.hpp"

#include <cmath>

#include "gwv/error.hpp"
#include "gwv/kernels.hpp"
#include "gwv/parallel.hpp"

namespace gwv {

double Varifold::mass() const {
  std::vector<double> w(particles.size());
  for (std::size_t k = 0; k < particles.size(); ++k) w[k] = particles[k].w;
  return kernels::reduce_pairwise(w);
}

VectorField2 as_field(const TestField& tf) {
  const Vec2 c = tf.center;
  const double inv_r2 = 1.0 / (tf.radius * tf.radius);
  const int d = tf.direction;
  VectorField2 f;
  f.value = [c, inv_r2, d](Vec2 x) {
    double q = 1.0 - (x - c).norm2() * inv_r2;
    if (q <= 0.0) return Vec2{0.0, 0.0};
    double phi = q * q * q;
    return d == 1 ? Vec2{phi, 0.0} : Vec2{0.0, phi};
  };
  f.jacobian = [c, inv_r2, d](Vec2 x) {
    Mat2 m;
    Vec2 dx = x - c;
    double q = 1.0 - dx.norm2() * inv_r2;
    if (q <= 0.0) return m;
    double coef = -6.0 * q * q * inv_r2;
    if (d == 1) {
      m.a11 = coef * dx.x;
      m.a12 = coef * dx.y;
    } else {
      m.a21 = coef * dx.x;
      m.a22 = coef * dx.y;
    }
    return m;
  };
  return f;
}

double first_variation(const Varifold& v, const VectorField2& X) {
  std::vector<double> terms(v.size());
  parallel_for(v.size(), [&](std::size_t k) {
    Vec2 t = v.tangent(k);
    terms[k] = v.particles[k].w * X.jacobian(v.particles[k].x).quad(t);
  });
  return kernels::reduce_pairwise(terms);
}

double first_variation(const Varifold& v, const TestField& X) {
  const std::size_t n = v.size();
  std::vector<double> xs(n), ys(n), phi(n), gx(n), gy(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = v.particles[k].x.x;
    ys[k] = v.particles[k].x.y;
  }
  kernels::bump_batch(X.center, X.radius, xs, ys, phi, gx, gy);
  std::vector<double> terms(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vec2 t = v.tangent(k);
    double td = X.direction == 1 ? t.x : t.y;
    terms[k] = v.particles[k].w * td * (gx[k] * t.x + gy[k] * t.y);
  }
  return kernels::reduce_pairwise(terms);
}

ParticleMeasure weight_measure(const Varifold& v) {
  std::vector<ScalarParticle> parts(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    parts[k] = {v.particles[k].x, v.particles[k].w};
  return ParticleMeasure::from(std::move(parts));
}

Varifold from_curve_system(const CurveSystem& gamma) {
  Varifold v;
  std::vector<Vec2> curv;
  for (const auto& c : gamma.curves) {
    const std::size_t n = c.samples.size();
    const double ds = c.spacing();
    const std::vector<Vec2> k = c.analytic_curvature ? *c.analytic_curvature : curvature(c);
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 t = c.samples[(i + 1) % n] - c.samples[i == 0 ? n - 1 : i - 1];
      VarifoldParticle p;
      p.x = c.samples[i];
      p.theta = line_angle(t);
      p.w = c.multiplicity * ds;
      v.particles.push_back(p);
      curv.push_back(k[i]);
    }
  }
  v.analytic_curvature = std::move(curv);
  return v;
}

Varifold from_young(const YoungMeasure& nu) {
  Varifold v;
  const double h2 = nu.grid.h * nu.grid.h;
  for (int j = 0; j < nu.grid.ny; ++j) {
    for (int i = 0; i < nu.grid.nx; ++i) {
      std::size_t k = nu.grid.idx(i, j);
      if (nu.cell_weight[k] == 0.0) continue;
      Vec2 x = nu.grid.pos(i, j);
      for (const auto& a : nu.cells[k]) {
        double len = a.z.norm();
        if (len == 0.0 || a.p == 0.0) continue;
        v.particles.push_back({x, line_angle(a.z.perp()), h2 * nu.cell_weight[k] * a.p * len});
      }
    }
  }
  for (const auto& la : nu.lambda) {
    for (const auto& d : la.dirs) {
      if (d.q == 0.0) continue;
      v.particles.push_back({la.pos, line_angle(d.d.perp()), la.w * d.q});
    }
  }
  return v;
}

Varifold from_level_family(const LevelFamily& phi) {
  require(phi.levels.size() == phi.systems.size(), "levels/systems size mismatch");
  const std::vector<double> w = trapezoid_weights(phi.levels);
  Varifold v;
  std::vector<Vec2> curv;
  bool have_curv = true;
  for (std::size_t li = 0; li < phi.systems.size(); ++li) {
    if (phi.systems[li].empty()) continue;
    Varifold lv = from_curve_system(phi.systems[li]);
    for (std::size_t k = 0; k < lv.size(); ++k) {
      VarifoldParticle p = lv.particles[k];
      p.w *= w[li];
      v.particles.push_back(p);
    }
    if (lv.analytic_curvature)
      curv.insert(curv.end(), lv.analytic_curvature->begin(), lv.analytic_curvature->end());
    else
      have_curv = false;
  }
  if (have_curv && curv.size() == v.particles.size()) v.analytic_curvature = std::move(curv);
  return v;
}

double willmore(const Varifold& v, double p,
                const std::optional<std::vector<Vec2>>& h_override) {
  require(p > 1.0, "exponent must exceed 1");
  const std::vector<Vec2>* H = nullptr;
  if (h_override)
    H = &*h_override;
  else if (v.analytic_curvature)
    H = &*v.analytic_curvature;
  require(H != nullptr, "no curvature available");
  require(H->size() == v.size(), "curvature array must match particles");
  std::vector<double> terms(v.size());
  for (std::size_t k = 0; k < v.size(); ++k)
    terms[k] = v.particles[k].w * (1.0 + std::pow((*H)[k].norm(), p));
  return kernels::reduce_pairwise(terms);
}

double pair_g1(const Varifold& v, const std::function<double(Vec2, double)>& f) {
  std::vector<double> terms(v.size());
  parallel_for(v.size(), [&](std::size_t k) {
    terms[k] = v.particles[k].w * f(v.particles[k].x, v.particles[k].theta);
  });
  return kernels::reduce_pairwise(terms);
}

}  // namespace gwv
