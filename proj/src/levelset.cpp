#include "gwv/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "gwv/error.hpp"

namespace gwv {

namespace {

// A crossing lives on a grid edge. Edges are keyed by their lower-left node
// and orientation: 2*node for horizontal, 2*node+1 for vertical.
using EdgeId = std::int64_t;

EdgeId hedge(const GridSpec& g, int i, int j) { return 2 * static_cast<EdgeId>(g.idx(i, j)); }
EdgeId vedge(const GridSpec& g, int i, int j) {
  return 2 * static_cast<EdgeId>(g.idx(i, j)) + 1;
}

struct Stitcher {
  std::unordered_map<EdgeId, Vec2> points;
  std::unordered_map<EdgeId, std::vector<EdgeId>> adj;

  void add_segment(EdgeId a, Vec2 pa, EdgeId b, Vec2 pb) {
    points.emplace(a, pa);
    points.emplace(b, pb);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
};

}  // namespace

ContourSet extract_contours(const ScalarField& u, double t) {
  const GridSpec& g = u.grid;
  Stitcher st;

  auto above = [&](int i, int j) { return u.at(i, j) > t; };
  auto interp = [&](Vec2 a, double va, Vec2 b, double vb) {
    double f = (t - va) / (vb - va);
    f = std::clamp(f, 0.0, 1.0);
    return a + (b - a) * f;
  };

  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double v00 = u.at(i, j), v10 = u.at(i + 1, j);
      const double v11 = u.at(i + 1, j + 1), v01 = u.at(i, j + 1);
      int c = (above(i, j) ? 1 : 0) | (above(i + 1, j) ? 2 : 0) |
              (above(i + 1, j + 1) ? 4 : 0) | (above(i, j + 1) ? 8 : 0);
      if (c == 0 || c == 15) continue;

      const Vec2 p00 = g.pos(i, j), p10 = g.pos(i + 1, j);
      const Vec2 p11 = g.pos(i + 1, j + 1), p01 = g.pos(i, j + 1);
      const EdgeId eb = hedge(g, i, j), er = vedge(g, i + 1, j);
      const EdgeId et = hedge(g, i, j + 1), el = vedge(g, i, j);
      const Vec2 pb = interp(p00, v00, p10, v10);
      const Vec2 pr = interp(p10, v10, p11, v11);
      const Vec2 pt = interp(p01, v01, p11, v11);
      const Vec2 pl = interp(p00, v00, p01, v01);

      switch (c) {
        case 1: case 14: st.add_segment(el, pl, eb, pb); break;
        case 2: case 13: st.add_segment(eb, pb, er, pr); break;
        case 3: case 12: st.add_segment(el, pl, er, pr); break;
        case 4: case 11: st.add_segment(er, pr, et, pt); break;
        case 6: case 9:  st.add_segment(eb, pb, et, pt); break;
        case 7: case 8:  st.add_segment(el, pl, et, pt); break;
        case 5: case 10: {
          // saddle: split by the cell-center average
          bool center_above = 0.25 * (v00 + v10 + v11 + v01) > t;
          bool pairs_with_bottom = (c == 5) == center_above;
          if (pairs_with_bottom) {
            st.add_segment(el, pl, eb, pb);
            st.add_segment(er, pr, et, pt);
          } else {
            st.add_segment(eb, pb, er, pr);
            st.add_segment(el, pl, et, pt);
          }
          break;
        }
        default: break;
      }
    }
  }

  // trace chains; every edge has degree 1 (open end) or 2
  ContourSet out;
  std::unordered_map<EdgeId, bool> used;
  auto trace = [&](EdgeId start, bool from_open_end) {
    std::vector<Vec2> chain;
    EdgeId prev = -1, cur = start;
    bool closed = false;
    while (true) {
      used[cur] = true;
      chain.push_back(st.points[cur]);
      const auto& nb = st.adj[cur];
      EdgeId next = -1;
      for (EdgeId n : nb)
        if (n != prev && !used[n]) { next = n; break; }
      if (next < 0) {
        // either ran back into the start (closed) or hit an open end
        if (!from_open_end)
          for (EdgeId n : nb)
            if (n == start && chain.size() > 2) closed = true;
        break;
      }
      prev = cur;
      cur = next;
    }
    if (closed)
      out.closed.push_back(std::move(chain));
    else
      out.open.push_back(std::move(chain));
  };

  // open chains first (start from degree-1 edges), then closed loops;
  // sorted keys keep the output order deterministic
  std::vector<EdgeId> keys;
  keys.reserve(st.adj.size());
  for (const auto& [e, nb] : st.adj) keys.push_back(e);
  std::sort(keys.begin(), keys.end());
  for (EdgeId e : keys)
    if (st.adj[e].size() == 1 && !used[e]) trace(e, true);
  for (EdgeId e : keys)
    if (!used[e]) trace(e, false);
  return out;
}

LevelFamily level_extract(const ScalarField& u, const std::vector<double>& t_grid,
                          LevelExtractOptions opts) {
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
    require(t_grid[i] < t_grid[i + 1], "levels must be strictly increasing");
  const double ds = opts.target_ds > 0.0 ? opts.target_ds : 0.5 * u.grid.h;
  const double min_len = opts.min_length_cells * u.grid.h;

  LevelFamily fam;
  fam.levels = t_grid;
  fam.systems.resize(t_grid.size());
  for (std::size_t li = 0; li < t_grid.size(); ++li) {
    ContourSet cs = extract_contours(u, t_grid[li]);
    if (opts.reject_open && !cs.open.empty())
      throw error("open level contour at t=" + std::to_string(t_grid[li]));
    CurveSystem sys;
    for (auto& loop : cs.closed) {
      double len = 0.0;
      for (std::size_t i = 0; i < loop.size(); ++i)
        len += (loop[(i + 1) % loop.size()] - loop[i]).norm();
      if (len < min_len) continue;
      int n = std::max(opts.min_samples, static_cast<int>(std::ceil(len / ds)));
      sys.curves.push_back(resample_arclength(loop, n));
    }
    fam.systems[li] = std::move(sys);
  }
  return fam;
}

}  // namespace gwv
