#include "gwv/curves.hpp"

#include <algorithm>
#include <cmath>

#include "gwv/error.hpp"
#include "gwv/kernels.hpp"

namespace gwv {

namespace {

double polyline_length(const std::vector<Vec2>& pts, bool closed) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) len += (pts[i + 1] - pts[i]).norm();
  if (closed && pts.size() > 1) len += (pts.front() - pts.back()).norm();
  return len;
}

// resample a closed polyline at n uniform arclength stations
std::vector<Vec2> uniform_stations(const std::vector<Vec2>& pts, int n) {
  std::vector<Vec2> loop = pts;
  loop.push_back(pts.front());
  std::vector<double> cum(loop.size(), 0.0);
  for (std::size_t i = 1; i < loop.size(); ++i)
    cum[i] = cum[i - 1] + (loop[i] - loop[i - 1]).norm();
  const double total = cum.back();
  std::vector<Vec2> out(n);
  std::size_t seg = 0;
  for (int j = 0; j < n; ++j) {
    double s = total * j / n;
    while (seg + 1 < cum.size() - 1 && cum[seg + 1] < s) ++seg;
    double ds = cum[seg + 1] - cum[seg];
    double t = ds > 0.0 ? (s - cum[seg]) / ds : 0.0;
    out[j] = loop[seg] + (loop[seg + 1] - loop[seg]) * t;
  }
  return out;
}

void smooth_pass(std::vector<Vec2>& pts) {
  const std::size_t n = pts.size();
  std::vector<Vec2> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = pts[i == 0 ? n - 1 : i - 1];
    const Vec2& b = pts[i];
    const Vec2& c = pts[i + 1 == n ? 0 : i + 1];
    next[i] = (a + b * 2.0 + c) * 0.25;
  }
  pts = std::move(next);
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.norm2();
  double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + ab * t)).norm();
}

// proper segment intersection test; touching endpoints count as intersection
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return (q - p).cross(r - p); };
  double o1 = orient(a, b, c), o2 = orient(a, b, d);
  double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

int winding_number(const std::vector<Vec2>& pts, Vec2 x) {
  int w = 0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 a = pts[i];
    Vec2 b = pts[(i + 1) % n];
    if (a.y <= x.y) {
      if (b.y > x.y && (b - a).cross(x - a) > 0.0) ++w;
    } else {
      if (b.y <= x.y && (b - a).cross(x - a) < 0.0) --w;
    }
  }
  return w;
}

}  // namespace

double ClosedCurve::uniformity_defect() const {
  if (samples.size() < 2) return 0.0;
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double d = (samples[(i + 1) % samples.size()] - samples[i]).norm();
    mn = std::min(mn, d);
    mx = std::max(mx, d);
  }
  double mean = 0.5 * (mn + mx);
  return mean > 0.0 ? (mx - mn) / mean : 0.0;
}

double CurveSystem::trace_distance(Vec2 x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) {
    const std::size_t n = c.samples.size();
    for (std::size_t i = 0; i < n; ++i)
      best = std::min(best, segment_distance(x, c.samples[i], c.samples[(i + 1) % n]));
  }
  return best;
}

double CurveSystem::diameter() const {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi = -lo;
  for (const auto& c : curves) {
    for (Vec2 p : c.samples) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
  }
  return curves.empty() ? 0.0 : (hi - lo).norm();
}

ClosedCurve resample_arclength(const std::vector<Vec2>& polyline, int n, int multiplicity) {
  require(n >= 16, "need at least 16 samples");
  std::vector<Vec2> distinct;
  for (Vec2 p : polyline)
    if (distinct.empty() || (p - distinct.back()).norm() > 0.0) distinct.push_back(p);
  while (distinct.size() > 1 && (distinct.front() - distinct.back()).norm() == 0.0)
    distinct.pop_back();
  require(distinct.size() >= 3, "degenerate polyline");
  const double target_len = polyline_length(distinct, true);
  require(target_len > 0.0, "degenerate polyline");

  std::vector<Vec2> pts = uniform_stations(distinct, n);
  smooth_pass(pts);
  smooth_pass(pts);
  pts = uniform_stations(pts, n);

  // similarity rescale about the centroid restores the input length
  Vec2 centroid{0.0, 0.0};
  for (Vec2 p : pts) centroid += p;
  centroid = centroid / static_cast<double>(n);
  double cur_len = polyline_length(pts, true);
  double s = target_len / cur_len;
  for (Vec2& p : pts) p = centroid + (p - centroid) * s;

  ClosedCurve c;
  c.samples = std::move(pts);
  c.length = target_len;
  c.multiplicity = multiplicity;
  return c;
}

std::vector<Vec2> curvature(const ClosedCurve& c) {
  const std::size_t n = c.samples.size();
  std::vector<double> xs(n), ys(n), kx(n), ky(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = c.samples[i].x;
    ys[i] = c.samples[i].y;
  }
  const double ds = c.spacing();
  kernels::second_diff_periodic(xs, ds, kx);
  kernels::second_diff_periodic(ys, ds, ky);
  std::vector<Vec2> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = {kx[i], ky[i]};
  return k;
}

double willmore_energy(const ClosedCurve& c, double p) {
  require(p > 1.0, "exponent must exceed 1");
  const std::vector<Vec2> k =
      c.analytic_curvature ? *c.analytic_curvature : curvature(c);
  const double ds = c.spacing();
  std::vector<double> terms(c.samples.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    terms[i] = (1.0 + std::pow(k[i].norm(), p)) * ds;
  return c.multiplicity * kernels::reduce_pairwise(terms);
}

double willmore_energy(const CurveSystem& gamma, double p) {
  require(p > 1.0, "exponent must exceed 1");
  std::vector<double> per_curve(gamma.curves.size());
  for (std::size_t i = 0; i < gamma.curves.size(); ++i)
    per_curve[i] = willmore_energy(gamma.curves[i], p);
  return kernels::reduce_pairwise(per_curve);
}

int interior_indicator(const CurveSystem& gamma, Vec2 x, double on_trace_tol) {
  double tol = on_trace_tol > 0.0 ? on_trace_tol : 1e-3 * gamma.diameter();
  if (!gamma.empty() && gamma.trace_distance(x) < tol) throw error("point on trace");
  long index = 0;
  for (const auto& c : gamma.curves)
    index += static_cast<long>(c.multiplicity) * winding_number(c.samples, x);
  return static_cast<int>(((index % 2) + 2) % 2);
}

std::vector<double> trapezoid_weights(const std::vector<double>& levels) {
  const std::size_t m = levels.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    double dt = levels[i + 1] - levels[i];
    w[i] += 0.5 * dt;
    w[i + 1] += 0.5 * dt;
  }
  return w;
}

double level_energy(const LevelFamily& phi, double p) {
  require(phi.levels.size() >= 2, "need at least 2 levels");
  require(phi.levels.size() == phi.systems.size(), "levels/systems size mismatch");
  for (std::size_t i = 0; i + 1 < phi.levels.size(); ++i)
    require(phi.levels[i] < phi.levels[i + 1], "levels must be strictly increasing");
  std::vector<double> w = trapezoid_weights(phi.levels);
  std::vector<double> terms(phi.systems.size());
  for (std::size_t i = 0; i < phi.systems.size(); ++i)
    terms[i] = w[i] * willmore_energy(phi.systems[i], p);
  return kernels::reduce_pairwise(terms);
}

NestednessReport nestedness_check(const LevelFamily& phi, const std::vector<Vec2>& probes,
                                  ContactTolerances tol) {
  require(phi.levels.size() >= 2, "need at least 2 levels");
  NestednessReport rep;
  const double cos_tangent = std::cos(tol.tangency_deg * kPi / 180.0);

  for (std::size_t lev = 0; lev + 1 < phi.systems.size(); ++lev) {
    const CurveSystem& lo = phi.systems[lev];       // t lower
    const CurveSystem& hi = phi.systems[lev + 1];   // t higher
    if (lo.empty() && hi.empty()) continue;
    double contact = tol.contact > 0.0
                         ? tol.contact
                         : 1e-3 * std::max(lo.diameter(), hi.diameter());

    // (i) segments of different levels must not cross transversally
    for (const auto& cl : lo.curves) {
      for (const auto& ch : hi.curves) {
        const std::size_t nl = cl.samples.size(), nh = ch.samples.size();
        for (std::size_t i = 0; i < nl; ++i) {
          Vec2 a = cl.samples[i], b = cl.samples[(i + 1) % nl];
          for (std::size_t j = 0; j < nh; ++j) {
            Vec2 c = ch.samples[j], d = ch.samples[(j + 1) % nh];
            if (!segments_intersect(a, b, c, d)) continue;
            Vec2 u = (b - a).normalized(), v = (d - c).normalized();
            if (std::abs(u.dot(v)) < cos_tangent) ++rep.crossing_count;
          }
        }
      }
    }

    // (ii) interior inclusion on the probe lattice
    for (Vec2 x : probes) {
      if (lo.trace_distance(x) < contact || hi.trace_distance(x) < contact) continue;
      if (hi.empty()) continue;
      int in_hi = interior_indicator(hi, x, contact);
      if (in_hi == 1) {
        int in_lo = lo.empty() ? 0 : interior_indicator(lo, x, contact);
        if (in_lo != 1) ++rep.inclusion_violations;
      }
    }

    // (iii) higher-level samples outside the closure of the lower interior
    // must ride on the lower trace
    std::size_t outside = 0, violating = 0, total = 0;
    for (const auto& ch : hi.curves) {
      for (Vec2 x : ch.samples) {
        ++total;
        double d_lo = lo.empty() ? std::numeric_limits<double>::infinity()
                                 : lo.trace_distance(x);
        if (d_lo <= contact) continue;  // on the closure boundary
        int in_lo = 0;
        if (!lo.empty()) in_lo = interior_indicator(lo, x, contact);
        if (in_lo == 0) {
          ++outside;
          ++violating;  // outside the closure and not near the trace
        }
      }
    }
    (void)outside;
    if (total > 0) {
      double frac = static_cast<double>(violating) / static_cast<double>(total);
      rep.worst_ghost_fraction = std::max(rep.worst_ghost_fraction, frac);
    }
  }

  rep.no_crossing = rep.crossing_count == 0;
  rep.interiors_nested = rep.inclusion_violations == 0;
  rep.ghost_condition = rep.worst_ghost_fraction < 1e-3;
  return rep;
}

ClosedCurve make_circle(Vec2 center, double radius, int n, int multiplicity) {
  ClosedCurve c;
  c.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * kPi * i / n;
    c.samples[i] = center + Vec2{radius * std::cos(a), radius * std::sin(a)};
  }
  // chord-consistent length: cancels the leading discretization bias in the
  // second-difference curvature
  c.length = n * (c.samples[1] - c.samples[0]).norm();
  c.multiplicity = multiplicity;
  return c;
}

std::vector<Vec2> rectangle_polyline(Vec2 lo, Vec2 hi, int per_side) {
  std::vector<Vec2> pts;
  pts.reserve(4 * per_side);
  for (int i = 0; i < per_side; ++i)
    pts.push_back({lo.x + (hi.x - lo.x) * i / per_side, lo.y});
  for (int i = 0; i < per_side; ++i)
    pts.push_back({hi.x, lo.y + (hi.y - lo.y) * i / per_side});
  for (int i = 0; i < per_side; ++i)
    pts.push_back({hi.x - (hi.x - lo.x) * i / per_side, hi.y});
  for (int i = 0; i < per_side; ++i)
    pts.push_back({lo.x, hi.y - (hi.y - lo.y) * i / per_side});
  return pts;
}

}  // namespace gwv
