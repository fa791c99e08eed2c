#include "gwv/young.hpp"

#include <algorithm>
#include <cmath>

#include "gwv/error.hpp"
#include "gwv/kernels.hpp"
#include "gwv/parallel.hpp"

namespace gwv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sample a polyline at spacing <= ds; returns midpoints, lengths and tangents
struct PolylineSamples {
  std::vector<Vec2> pos;
  std::vector<double> len;
  std::vector<Vec2> tangent;
};

PolylineSamples sample_polyline(const std::vector<Vec2>& pts, bool closed, double ds) {
  PolylineSamples out;
  const std::size_t n = pts.size();
  const std::size_t m = closed ? n : n - 1;
  for (std::size_t i = 0; i < m; ++i) {
    Vec2 a = pts[i];
    Vec2 b = pts[(i + 1) % n];
    double seg = (b - a).norm();
    if (seg == 0.0) continue;
    int pieces = std::max(1, static_cast<int>(std::ceil(seg / ds)));
    Vec2 t = (b - a) / seg;
    for (int k = 0; k < pieces; ++k) {
      double s0 = seg * k / pieces, s1 = seg * (k + 1) / pieces;
      out.pos.push_back(a + t * (0.5 * (s0 + s1)));
      out.len.push_back(s1 - s0);
      out.tangent.push_back(t);
    }
  }
  return out;
}

// does the open segment a-b cross any jump segment?
bool crosses_jump(Vec2 a, Vec2 b, const std::vector<JumpCurve>& jumps) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return (q - p).cross(r - p); };
  for (const auto& jc : jumps) {
    const std::size_t n = jc.polyline.size();
    const std::size_t m = jc.closed ? n : n - 1;
    for (std::size_t i = 0; i < m; ++i) {
      Vec2 c = jc.polyline[i];
      Vec2 d = jc.polyline[(i + 1) % n];
      double o1 = orient(a, b, c), o2 = orient(a, b, d);
      double o3 = orient(c, d, a), o4 = orient(c, d, b);
      if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0))) return true;
    }
  }
  return false;
}

}  // namespace

double YoungMeasure::lambda_mass() const {
  std::vector<double> w(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) w[i] = lambda[i].w;
  return kernels::reduce_pairwise(w);
}

ParticleMeasure YoungMeasure::lambda_measure() const {
  std::vector<ScalarParticle> parts(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) parts[i] = {lambda[i].pos, lambda[i].w};
  return ParticleMeasure::from(std::move(parts));
}

double YoungMeasure::oscillation_moment() const {
  const double h2 = grid.h * grid.h;
  std::vector<double> terms(cells.size(), 0.0);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (cell_weight[k] == 0.0) continue;
    double s = 0.0;
    for (const auto& a : cells[k]) s += a.p * a.z.norm();
    terms[k] = h2 * cell_weight[k] * s;
  }
  return kernels::reduce_pairwise(terms);
}

void YoungMeasure::validate() const {
  require(cells.size() == grid.count() && cell_weight.size() == grid.count(),
          "cell arrays must match the grid");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (cell_weight[k] == 0.0) continue;
    double s = 0.0;
    for (const auto& a : cells[k]) s += a.p;
    require(std::abs(s - 1.0) <= 1e-12, "oscillation atom probabilities must sum to 1");
  }
  for (const auto& la : lambda) {
    require(la.w >= 0.0, "lambda weights must be nonnegative");
    double s = 0.0;
    for (const auto& d : la.dirs) {
      require(std::abs(d.d.norm() - 1.0) <= 1e-9, "angular atoms must be unit vectors");
      s += d.q;
    }
    require(std::abs(s - 1.0) <= 1e-12, "angular atom probabilities must sum to 1");
  }
  require(std::isfinite(oscillation_moment() + lambda_mass()),
          "young measure must have finite first moment");
}

YoungMeasure YoungMeasure::zero(const GridSpec& g, std::vector<double> weights) {
  YoungMeasure nu;
  nu.grid = g;
  nu.cell_weight = weights.empty() ? std::vector<double>(g.count(), 1.0) : std::move(weights);
  nu.cells.assign(g.count(), {AtomZ{{0.0, 0.0}, 1.0}});
  return nu;
}

double pairing(const YoungMeasure& nu, const Integrand& f) {
  require(static_cast<bool>(f.f), "integrand required");
  const double h2 = nu.grid.h * nu.grid.h;
  std::vector<double> terms(nu.cells.size(), 0.0);
  parallel_for(nu.cells.size(), [&](std::size_t k) {
    if (nu.cell_weight[k] == 0.0 || nu.cells[k].empty()) return;
    int i = static_cast<int>(k) % nu.grid.nx;
    int j = static_cast<int>(k) / nu.grid.nx;
    Vec2 x = nu.grid.pos(i, j);
    double s = 0.0;
    for (const auto& a : nu.cells[k]) s += a.p * f.f(x, a.z);
    terms[k] = h2 * nu.cell_weight[k] * s;
  });

  double lam_mass = nu.lambda_mass();
  std::vector<double> lam_terms;
  if (lam_mass > 0.0) {
    if (f.superlinear) return kInf;
    require(static_cast<bool>(f.f_inf),
            "recession function required when concentration mass is present");
    lam_terms.resize(nu.lambda.size(), 0.0);
    parallel_for(nu.lambda.size(), [&](std::size_t k) {
      const auto& la = nu.lambda[k];
      double s = 0.0;
      for (const auto& d : la.dirs) s += d.q * f.f_inf(la.pos, d.d);
      lam_terms[k] = la.w * s;
    });
  }
  terms.insert(terms.end(), lam_terms.begin(), lam_terms.end());
  for (double t : terms)
    require(std::isfinite(t), "integrand not finite on support");
  return kernels::reduce_pairwise(terms);
}

VectorParticleMeasure barycenter(const YoungMeasure& nu) {
  std::vector<VectorParticle> parts;
  parts.reserve(nu.grid.count() + nu.lambda.size());
  const double h2 = nu.grid.h * nu.grid.h;
  for (int j = 0; j < nu.grid.ny; ++j) {
    for (int i = 0; i < nu.grid.nx; ++i) {
      std::size_t k = nu.grid.idx(i, j);
      if (nu.cell_weight[k] == 0.0 || nu.cells[k].empty()) continue;
      Vec2 m{0.0, 0.0};
      for (const auto& a : nu.cells[k]) m += a.z * a.p;
      parts.push_back({nu.grid.pos(i, j), m * (h2 * nu.cell_weight[k])});
    }
  }
  for (const auto& la : nu.lambda) {
    Vec2 m{0.0, 0.0};
    for (const auto& d : la.dirs) m += d.d * d.q;
    parts.push_back({la.pos, m * la.w});
  }
  return VectorParticleMeasure::from(std::move(parts));
}

namespace {

// per-node gradient that never differences across a jump; falls back to
// one-sided stencils beside jump curves
std::vector<Vec2> jump_aware_gradient(const ScalarField& u,
                                      const std::vector<JumpCurve>& jumps) {
  if (jumps.empty()) return gradient_field(u);
  const GridSpec& g = u.grid;
  std::vector<Vec2> grad(g.count());
  parallel_for(g.count(), [&](std::size_t k) {
    int i = static_cast<int>(k) % g.nx;
    int j = static_cast<int>(k) / g.nx;
    Vec2 c = g.pos(i, j);
    auto axis_slope = [&](int di, int dj) -> double {
      int ip = i + di, jp = j + dj;
      int im = i - di, jm = j - dj;
      bool fwd_ok = ip >= 0 && ip < g.nx && jp >= 0 && jp < g.ny &&
                    !crosses_jump(c, g.pos(ip, jp), jumps);
      bool bwd_ok = im >= 0 && im < g.nx && jm >= 0 && jm < g.ny &&
                    !crosses_jump(c, g.pos(im, jm), jumps);
      if (fwd_ok && bwd_ok)
        return (u.at(ip, jp) - u.at(im, jm)) / (2.0 * g.h);
      if (fwd_ok) return (u.at(ip, jp) - u.at(i, j)) / g.h;
      if (bwd_ok) return (u.at(i, j) - u.at(im, jm)) / g.h;
      return 0.0;
    };
    grad[k] = {axis_slope(1, 0), axis_slope(0, 1)};
  });
  return grad;
}

}  // namespace

YoungMeasure from_bv(const ScalarField& u, const std::vector<JumpCurve>& jumps) {
  const GridSpec& g = u.grid;
  for (const auto& jc : jumps) {
    for (Vec2 p : jc.polyline) {
      bool inside = p.x >= g.origin.x && p.x <= g.origin.x + (g.nx - 1) * g.h &&
                    p.y >= g.origin.y && p.y <= g.origin.y + (g.ny - 1) * g.h;
      require(inside, "jump polyline leaves the grid");
    }
  }

  YoungMeasure nu;
  nu.grid = g;
  nu.cell_weight = u.cell_weight;
  nu.cells.assign(g.count(), {});

  const std::vector<Vec2> grad = jump_aware_gradient(u, jumps);
  const double eps = gradient_floor(u, grad);
  for (std::size_t k = 0; k < g.count(); ++k) {
    if (nu.cell_weight[k] == 0.0) continue;
    Vec2 z = grad[k].norm() >= eps ? grad[k] : Vec2{0.0, 0.0};
    nu.cells[k] = {AtomZ{z, 1.0}};
  }

  for (const auto& jc : jumps) {
    double gap = jc.u_plus - jc.u_minus;
    if (gap == 0.0) continue;
    PolylineSamples s = sample_polyline(jc.polyline, jc.closed, 0.5 * g.h);
    double sign = gap > 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < s.pos.size(); ++i) {
      LambdaAtom la;
      la.pos = s.pos[i];
      la.w = std::abs(gap) * s.len[i];
      la.dirs = {AtomDir{(s.tangent[i].perp() * sign).normalized(), 1.0}};
      nu.lambda.push_back(la);
    }
  }
  return nu;
}

VectorParticleMeasure bv_derivative(const ScalarField& u,
                                    const std::vector<JumpCurve>& jumps) {
  return barycenter(from_bv(u, jumps));
}

YoungMeasure add(const YoungMeasure& a, const YoungMeasure& b) {
  require(a.grid == b.grid, "addends must share the grid");
  for (std::size_t k = 0; k < b.cells.size(); ++k) {
    if (b.cell_weight[k] == 0.0) continue;
    for (const auto& atom : b.cells[k])
      require(atom.z.norm() <= 1e-12, "only GY(0)-shaped addends supported");
  }
  YoungMeasure out = a;
  out.lambda.insert(out.lambda.end(), b.lambda.begin(), b.lambda.end());
  return out;
}

MembershipReport gy_membership_report(const YoungMeasure& nu,
                                      const VectorParticleMeasure& du_ref, double tol) {
  MembershipReport rep;
  double first_moment = nu.oscillation_moment() + nu.lambda_mass();
  rep.moment_finite = std::isfinite(first_moment);

  // concentration mass in a 2-cell band around the box edge
  const GridSpec& g = nu.grid;
  const double band = 2.0 * g.h;
  const double x0 = g.origin.x, x1 = g.origin.x + (g.nx - 1) * g.h;
  const double y0 = g.origin.y, y1 = g.origin.y + (g.ny - 1) * g.h;
  std::vector<double> boundary_terms;
  for (const auto& la : nu.lambda) {
    double d = std::min(std::min(la.pos.x - x0, x1 - la.pos.x),
                        std::min(la.pos.y - y0, y1 - la.pos.y));
    if (d <= band) boundary_terms.push_back(la.w);
  }
  rep.lambda_total = nu.lambda_mass();
  rep.lambda_boundary_mass = kernels::reduce_pairwise(boundary_terms);
  rep.boundary_ok = rep.lambda_boundary_mass <= tol * std::max(rep.lambda_total, 1.0);

  // Bar_nu against the reference derivative over a fixed witness battery
  const VectorParticleMeasure bar = barycenter(nu);
  const std::vector<std::function<Vec2(Vec2)>> battery = {
      [](Vec2) { return Vec2{1.0, 0.0}; },
      [](Vec2) { return Vec2{0.0, 1.0}; },
      [](Vec2 x) { return Vec2{x.x, 0.0}; },
      [](Vec2 x) { return Vec2{0.0, x.y}; },
      [](Vec2 x) { return Vec2{x.y, x.x}; },
      [](Vec2 x) { return Vec2{x.x * x.y, x.x - x.y}; },
      [](Vec2 x) { return Vec2{std::cos(x.x), std::sin(x.y)}; },
      [](Vec2 x) { return Vec2{std::sin(2.0 * x.x), std::cos(2.0 * x.y)}; },
      [](Vec2 x) { return Vec2{x.norm2(), 0.0}; },
      [](Vec2 x) { return Vec2{0.0, x.norm2()}; },
  };
  double worst = 0.0;
  double scale = 1.0 + du_ref.total_variation();
  for (const auto& gfun : battery)
    worst = std::max(worst, std::abs(pair(bar, gfun) - pair(du_ref, gfun)));
  rep.barycenter_residual = worst / scale;
  rep.barycenter_ok = rep.barycenter_residual <= tol;
  return rep;
}

}  // namespace gwv
