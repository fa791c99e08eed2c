#include "gwv/relax.hpp"

#include <algorithm>
#include <cmath>

#include "gwv/error.hpp"
#include "gwv/kernels.hpp"

namespace gwv {

namespace {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.norm2();
  double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + ab * t)).norm();
}

// nearest jump segment: distance and the D^s u direction there
struct JumpHit {
  double dist = std::numeric_limits<double>::infinity();
  Vec2 du_dir{0.0, 0.0};
};

JumpHit nearest_jump(Vec2 p, const std::vector<JumpCurve>& jumps) {
  JumpHit hit;
  for (const auto& jc : jumps) {
    const std::size_t n = jc.polyline.size();
    const std::size_t m = jc.closed ? n : n - 1;
    double sign = jc.u_plus - jc.u_minus > 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      Vec2 a = jc.polyline[i];
      Vec2 b = jc.polyline[(i + 1) % n];
      double d = point_segment_distance(p, a, b);
      if (d < hit.dist) {
        hit.dist = d;
        hit.du_dir = ((b - a).perp() * sign).normalized();
      }
    }
  }
  return hit;
}

}  // namespace

CoareaReport coarea_check(const ScalarField& u, double p, const std::vector<double>& t_grid,
                          LevelExtractOptions opts) {
  CoareaReport rep;
  rep.f_direct = f_energy(u, p);
  try {
    LevelFamily fam = level_extract(u, t_grid, opts);
    rep.f_levels = level_energy(fam, p);
  } catch (const error& e) {
    rep.open_levels = true;
    rep.note = e.what();
    return rep;
  }
  rep.gap_rel = std::abs(rep.f_direct - rep.f_levels) / std::max(rep.f_direct, 1e-300);
  return rep;
}

SmoothEqualityReport smooth_equality_check(const ScalarField& u, double p) {
  SmoothEqualityReport rep;
  rep.f_u = f_energy(u, p);

  const YoungMeasure nu = from_bv(u);
  const Varifold v = from_young(nu);

  // curvature from u itself: H = -div(grad u/|grad u|) grad u/|grad u|
  const std::vector<Vec2> grad = gradient_field(u);
  const double eps = gradient_floor(u, grad);
  const std::vector<double> kappa = curvature_divergence(u);
  std::vector<Vec2> H(v.size());
  const GridSpec& g = u.grid;
  for (std::size_t k = 0; k < v.size(); ++k) {
    Vec2 x = v.particles[k].x;
    int i = static_cast<int>(std::lround((x.x - g.origin.x) / g.h));
    int j = static_cast<int>(std::lround((x.y - g.origin.y) / g.h));
    std::size_t c = g.idx(i, j);
    Vec2 n = grad[c].norm() >= eps ? grad[c].normalized() : Vec2{0.0, 0.0};
    H[k] = n * -kappa[c];
  }
  rep.w_vnu = willmore(v, p, H);
  rep.gap_rel = std::abs(rep.f_u - rep.w_vnu) / std::max(rep.f_u, 1e-300);
  return rep;
}

SistemaYoungResult sistema_young_build(const ScalarField& u,
                                       const std::vector<JumpCurve>& jumps,
                                       const LevelFamily& phi, double p, double match_tol) {
  const GridSpec& g = u.grid;
  const double tol = match_tol > 0.0 ? match_tol : 0.5 * g.h;
  const double band = 2.0 * g.h;
  const double x0 = g.origin.x + band, x1 = g.origin.x + (g.nx - 1) * g.h - band;
  const double y0 = g.origin.y + band, y1 = g.origin.y + (g.ny - 1) * g.h - band;
  for (const auto& sys : phi.systems)
    for (const auto& c : sys.curves)
      for (Vec2 s : c.samples)
        require(s.x > x0 && s.x < x1 && s.y > y0 && s.y < y1, "ipotbordo violated");

  SistemaYoungResult out;
  out.nu = from_bv(u, jumps);
  out.nu.lambda.clear();  // replaced by the level-integrated concentration part

  const std::vector<double> w = trapezoid_weights(phi.levels);
  std::vector<ScalarParticle> m_parts;
  for (std::size_t li = 0; li < phi.systems.size(); ++li) {
    for (const auto& c : phi.systems[li].curves) {
      const std::size_t n = c.samples.size();
      const double ds = c.spacing();
      const double theta = static_cast<double>(c.multiplicity);
      for (std::size_t i = 0; i < n; ++i) {
        Vec2 x = c.samples[i];
        Vec2 tangent = (c.samples[(i + 1) % n] - c.samples[i == 0 ? n - 1 : i - 1]).normalized();
        JumpHit hit = nearest_jump(x, jumps);
        LambdaAtom la;
        la.pos = x;
        la.w = theta * ds * w[li];
        if (hit.dist <= tol) {
          // essential-boundary sample: one unit of D^s u plus multiplicity excess
          double qp = (theta + 1.0) / (2.0 * theta);
          double qm = (theta - 1.0) / (2.0 * theta);
          la.dirs.push_back({hit.du_dir, qp});
          if (qm > 0.0) la.dirs.push_back({-hit.du_dir, qm});
          if (theta > 1.0) m_parts.push_back({x, (theta - 1.0) * ds * w[li]});
        } else {
          // ghost sample
          Vec2 nrm = tangent.perp().normalized();
          la.dirs.push_back({nrm, 0.5});
          la.dirs.push_back({-nrm, 0.5});
          m_parts.push_back({x, theta * ds * w[li]});
        }
        out.nu.lambda.push_back(la);
      }
    }
  }
  out.m = ParticleMeasure::from(std::move(m_parts));
  out.m_mass = total_mass(out.m);

  out.v = from_level_family(phi);
  out.g_phi = level_energy(phi, p);
  out.w_v = willmore(out.v, p);
  out.identity_gap_rel = std::abs(out.g_phi - out.w_v) / std::max(out.g_phi, 1e-300);
  return out;
}

MinvuReport minvu_gap(double fbar_estimate, const std::string& provenance, double p,
                      const std::vector<MinvuCandidate>& candidates,
                      const VectorParticleMeasure& du_ref,
                      const std::vector<double>& ratio_radii, double tol) {
  require(!candidates.empty(), "need at least one candidate");
  MinvuReport rep;
  rep.fbar_estimate = fbar_estimate;
  rep.fbar_provenance = provenance;
  rep.min_w = std::numeric_limits<double>::infinity();
  for (const auto& cand : candidates) {
    CandidateVerdict verdict;
    verdict.name = cand.name;
    verdict.w = willmore(cand.v, p);
    if (cand.nu) {
      verdict.has_membership = true;
      verdict.membership = gy_membership_report(*cand.nu, du_ref);
    }
    for (Vec2 probe : cand.ratio_probes) {
      RatioProfile prof = singular_ratio(cand.v, probe, ratio_radii);
      double mx = *std::max_element(prof.ratio.begin(), prof.ratio.end());
      double mn = *std::min_element(prof.ratio.begin(), prof.ratio.end());
      if (mx > 2.0 * mn + 1e-9) verdict.ratio_bounded = false;
      verdict.ratios.push_back(std::move(prof));
    }
    if (verdict.w < rep.min_w) {
      rep.min_w = verdict.w;
      rep.argmin = verdict.name;
    }
    rep.candidates.push_back(std::move(verdict));
  }
  rep.inequality_ok = fbar_estimate + tol * std::max(1.0, fbar_estimate) >= rep.min_w;
  rep.gap_rel = (fbar_estimate - rep.min_w) / std::max(fbar_estimate, 1e-300);
  return rep;
}

// ---- geometry primitives ----------------------------------------------------

ClosedCurve sample_path(const std::vector<PathPiece>& pieces, double target_ds,
                        int multiplicity) {
  std::vector<double> len(pieces.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    len[i] = pieces[i].is_arc ? std::abs(pieces[i].ang1 - pieces[i].ang0) * pieces[i].r
                              : (pieces[i].b - pieces[i].a).norm();
    total += len[i];
  }
  require(total > 0.0, "degenerate path");
  int n = std::max(16, static_cast<int>(std::lround(total / target_ds)));
  double ds = total / n;

  ClosedCurve c;
  c.samples.resize(n);
  std::vector<Vec2> curv(n, Vec2{0.0, 0.0});
  std::size_t piece = 0;
  double consumed = 0.0;
  for (int k = 0; k < n; ++k) {
    double s = k * ds;
    while (piece + 1 < pieces.size() && consumed + len[piece] <= s) consumed += len[piece++];
    double local = s - consumed;
    const PathPiece& pc = pieces[piece];
    if (pc.is_arc) {
      double dir = pc.ang1 >= pc.ang0 ? 1.0 : -1.0;
      double ang = pc.ang0 + dir * local / pc.r;
      Vec2 pos = pc.center + Vec2{pc.r * std::cos(ang), pc.r * std::sin(ang)};
      c.samples[k] = pos;
      curv[k] = (pc.center - pos).normalized() / pc.r;
    } else {
      Vec2 t = (pc.b - pc.a).normalized();
      c.samples[k] = pc.a + t * local;
    }
  }
  c.length = total;
  c.multiplicity = multiplicity;
  c.analytic_curvature = std::move(curv);
  return c;
}

Varifold segment_star(Vec2 junction, const std::vector<double>& angles_deg, double length,
                      double ds) {
  Varifold v;
  std::vector<Vec2> curv;
  for (double deg : angles_deg) {
    Vec2 dir = {std::cos(deg * kPi / 180.0), std::sin(deg * kPi / 180.0)};
    int n = std::max(8, static_cast<int>(std::lround(length / ds)));
    double step = length / n;
    for (int i = 0; i < n; ++i) {
      Vec2 x = junction + dir * ((i + 0.5) * step);
      v.particles.push_back({x, line_angle(dir), step});
      curv.push_back({0.0, 0.0});
    }
  }
  v.analytic_curvature = std::move(curv);
  return v;
}

ClosedCurve ghost_segment(Vec2 a, Vec2 b, double target_ds) {
  double L = (b - a).norm();
  require(L > 0.0, "degenerate ghost segment");
  int n = std::max(16, static_cast<int>(std::lround(L / target_ds)));
  double ds = L / n;
  Vec2 dir = (b - a) / L;
  ClosedCurve c;
  c.samples.reserve(2 * n);
  for (int i = 0; i < n; ++i) c.samples.push_back(a + dir * (i * ds));
  for (int i = 0; i < n; ++i) c.samples.push_back(b - dir * (i * ds));
  c.length = 2.0 * L;
  c.multiplicity = 1;
  // the traversal covers the trace twice; the two turning points are
  // measure-zero and carry no curvature energy in the limit object
  c.analytic_curvature = std::vector<Vec2>(2 * n, Vec2{0.0, 0.0});
  return c;
}

ClosedCurve rounded_square(Vec2 lo, Vec2 hi, double corner_radius, double target_ds,
                           const std::vector<int>& sharp_corners) {
  const double rho = corner_radius;
  require(rho > 0.0 && 2.0 * rho < std::min(hi.x - lo.x, hi.y - lo.y),
          "corner radius must fit the square");
  const Vec2 corner[4] = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
  auto is_sharp = [&](int i) {
    return std::find(sharp_corners.begin(), sharp_corners.end(), i) != sharp_corners.end();
  };
  // CCW edge directions leaving corner i
  const Vec2 dir[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};

  std::vector<PathPiece> pieces;
  for (int i = 0; i < 4; ++i) {
    int nxt = (i + 1) % 4;
    Vec2 from = is_sharp(i) ? corner[i] : corner[i] + dir[i] * rho;
    Vec2 to = is_sharp(nxt) ? corner[nxt] : corner[nxt] - dir[i] * rho;
    pieces.push_back({false, from, to, {}, 0.0, 0.0, 0.0});
    if (!is_sharp(nxt)) {
      // quarter arc turning left at corner nxt
      Vec2 center = corner[nxt] - dir[i] * rho + dir[nxt] * rho;
      double ang0 = full_angle(to - center);
      pieces.push_back({true, {}, {}, center, rho, ang0, ang0 + kPi / 2.0});
    }
  }
  return sample_path(pieces, target_ds);
}

}  // namespace gwv
