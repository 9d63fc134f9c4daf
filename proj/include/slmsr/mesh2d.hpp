#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "slmsr/errors.hpp"
#include "slmsr/rng.hpp"
#include "slmsr/torus.hpp"

namespace slmsr {

struct TriCell {
  std::array<int, 3> v;                  // node ids, positively oriented
  std::array<std::array<int, 2>, 3> off; // integer unwrap offset per vertex
};

struct MeshEdge {
  int a = -1, b = -1;       // node ids, a < b
  std::array<int, 2> off;   // unwrap offset of b relative to a's canonical position
  std::array<int, 2> tri{-1, -1};
};

// Conforming triangulation of the unit torus. Node coordinates are stored
// wrapped into [0,1)^2; each triangle carries integer offsets that unwrap its
// vertices into a simply connected frame.
struct TriMesh2D {
  std::vector<Vec2> nodes;
  std::vector<TriCell> tris;
  std::vector<MeshEdge> edges;
  std::vector<std::array<int, 3>> tri_edges;  // edge id opposite each local vertex

  // point-location acceleration: uniform bins over [0,1)^2
  int grid_n = 0;
  std::vector<std::vector<std::pair<int, std::array<int, 2>>>> grid;  // (tri, image offset)

  Vec2 corner(int t, int k) const {
    const TriCell& c = tris[t];
    return {nodes[c.v[k]].x + c.off[k][0], nodes[c.v[k]].y + c.off[k][1]};
  }

  double area(int t) const {
    const Vec2 p0 = corner(t, 0), p1 = corner(t, 1), p2 = corner(t, 2);
    return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
  }

  // edge a->b unwrapped in the canonical frame of node a
  Vec2 edge_vector(int e) const {
    const MeshEdge& ed = edges[e];
    return {nodes[ed.b].x + ed.off[0] - nodes[ed.a].x, nodes[ed.b].y + ed.off[1] - nodes[ed.a].y};
  }
};

namespace detail {

inline std::array<int, 2> minimal_image_offset(const Vec2& from, const Vec2& to) {
  const double dx = torus_delta(to.x - from.x);
  const double dy = torus_delta(to.y - from.y);
  return {static_cast<int>(std::lround(from.x + dx - to.x)),
          static_cast<int>(std::lround(from.y + dy - to.y))};
}

inline void build_edges_and_grid(TriMesh2D& mesh) {
  // orient all triangles positively
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    if (mesh.area(static_cast<int>(t)) < 0.0) {
      std::swap(mesh.tris[t].v[1], mesh.tris[t].v[2]);
      std::swap(mesh.tris[t].off[1], mesh.tris[t].off[2]);
    }
    if (mesh.area(static_cast<int>(t)) <= 0.0)
      throw InvalidConnectivityError("mesh: degenerate triangle " + std::to_string(t));
  }

  using EdgeKey = std::tuple<int, int, int, int>;
  std::map<EdgeKey, int> edge_ids;
  mesh.edges.clear();
  mesh.tri_edges.assign(mesh.tris.size(), {-1, -1, -1});
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const TriCell& c = mesh.tris[t];
    for (int l = 0; l < 3; ++l) {
      const int p = c.v[(l + 1) % 3], q = c.v[(l + 2) % 3];
      const std::array<int, 2> op = c.off[(l + 1) % 3], oq = c.off[(l + 2) % 3];
      int a = p, b = q;
      std::array<int, 2> rel{oq[0] - op[0], oq[1] - op[1]};
      if (a > b) {
        std::swap(a, b);
        rel = {-rel[0], -rel[1]};
      }
      const EdgeKey key{a, b, rel[0], rel[1]};
      auto it = edge_ids.find(key);
      int e;
      if (it == edge_ids.end()) {
        e = static_cast<int>(mesh.edges.size());
        edge_ids.emplace(key, e);
        MeshEdge ed;
        ed.a = a;
        ed.b = b;
        ed.off = rel;
        ed.tri[0] = static_cast<int>(t);
        mesh.edges.push_back(ed);
      } else {
        e = it->second;
        if (mesh.edges[e].tri[1] != -1)
          throw InvalidConnectivityError("mesh: edge shared by more than two triangles");
        mesh.edges[e].tri[1] = static_cast<int>(t);
      }
      mesh.tri_edges[t][l] = e;
    }
  }
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    if (mesh.edges[e].tri[1] == -1)
      throw InvalidConnectivityError("mesh: boundary edge on torus (edge " + std::to_string(e) + ")");
  const long long euler = static_cast<long long>(mesh.nodes.size()) -
                          static_cast<long long>(mesh.edges.size()) +
                          static_cast<long long>(mesh.tris.size());
  if (euler != 0) throw InvalidConnectivityError("mesh: torus Euler characteristic nonzero");

  // bin grid over the fundamental domain; each bin lists (triangle, image)
  mesh.grid_n = std::max(4, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(mesh.tris.size())))));
  mesh.grid.assign(static_cast<std::size_t>(mesh.grid_n) * mesh.grid_n, {});
  const double gn = mesh.grid_n;
  for (std::size_t t = 0; t < mesh.tris.size(); ++t) {
    const Vec2 p0 = mesh.corner(static_cast<int>(t), 0);
    const Vec2 p1 = mesh.corner(static_cast<int>(t), 1);
    const Vec2 p2 = mesh.corner(static_cast<int>(t), 2);
    const double xmin = std::min({p0.x, p1.x, p2.x}), xmax = std::max({p0.x, p1.x, p2.x});
    const double ymin = std::min({p0.y, p1.y, p2.y}), ymax = std::max({p0.y, p1.y, p2.y});
    for (int ox = -2; ox <= 2; ++ox) {
      if (xmax + ox < 0.0 || xmin + ox > 1.0) continue;
      for (int oy = -2; oy <= 2; ++oy) {
        if (ymax + oy < 0.0 || ymin + oy > 1.0) continue;
        const int ix0 = std::max(0, static_cast<int>(std::floor((xmin + ox) * gn)));
        const int ix1 = std::min(mesh.grid_n - 1, static_cast<int>(std::floor((xmax + ox) * gn)));
        const int iy0 = std::max(0, static_cast<int>(std::floor((ymin + oy) * gn)));
        const int iy1 = std::min(mesh.grid_n - 1, static_cast<int>(std::floor((ymax + oy) * gn)));
        for (int ix = ix0; ix <= ix1; ++ix)
          for (int iy = iy0; iy <= iy1; ++iy)
            mesh.grid[static_cast<std::size_t>(iy) * mesh.grid_n + ix].push_back(
                {static_cast<int>(t), {ox, oy}});
      }
    }
  }
  for (auto& bin : mesh.grid)
    std::sort(bin.begin(), bin.end());
}

// --- planar Delaunay (Bowyer-Watson), used on the replicated point set ---

struct BWTri {
  int v[3];
  bool alive = true;
};

inline long double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
         (static_cast<long double>(c.x) - a.x) * (static_cast<long double>(b.y) - a.y);
}

inline bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  const long double ax = a.x - p.x, ay = a.y - p.y;
  const long double bx = b.x - p.x, by = b.y - p.y;
  const long double cx = c.x - p.x, cy = c.y - p.y;
  const long double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                          (bx * bx + by * by) * (ax * cy - cx * ay) +
                          (cx * cx + cy * cy) * (ax * by - bx * ay);
  return det > 0.0L;
}

inline std::vector<std::array<int, 3>> bowyer_watson(std::vector<Vec2> pts) {
  const int n = static_cast<int>(pts.size());
  // super-triangle well outside the replicated domain [-1,2]^2
  pts.push_back({-40.0, -40.0});
  pts.push_back({82.0, -40.0});
  pts.push_back({0.5, 80.0});
  std::vector<BWTri> tris;
  tris.push_back({{n, n + 1, n + 2}, true});
  std::vector<int> bad;
  std::map<std::pair<int, int>, int> boundary;
  for (int ip = 0; ip < n; ++ip) {
    const Vec2& p = pts[ip];
    bad.clear();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      if (in_circumcircle(pts[tris[t].v[0]], pts[tris[t].v[1]], pts[tris[t].v[2]], p))
        bad.push_back(t);
    }
    boundary.clear();
    for (int t : bad) {
      for (int l = 0; l < 3; ++l) {
        int a = tris[t].v[l], b = tris[t].v[(l + 1) % 3];
        const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        auto it = boundary.find(key);
        if (it == boundary.end())
          boundary.emplace(key, a);  // store orientation of first appearance
        else
          it->second = -1;  // interior edge of the cavity
      }
      tris[t].alive = false;
    }
    for (const auto& [key, first_a] : bad.empty()
             ? std::map<std::pair<int, int>, int>{}
             : boundary) {
      if (first_a < 0) continue;
      const int a = first_a;
      const int b = (key.first == a) ? key.second : key.first;
      tris.push_back({{a, b, ip}, true});
    }
  }
  std::vector<std::array<int, 3>> out;
  for (const BWTri& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    std::array<int, 3> tri{t.v[0], t.v[1], t.v[2]};
    if (orient2d(pts[tri[0]], pts[tri[1]], pts[tri[2]]) < 0.0L) std::swap(tri[1], tri[2]);
    out.push_back(tri);
  }
  return out;
}

}  // namespace detail

// Assemble a torus mesh from wrapped node positions and triangle node ids;
// unwrap offsets are recovered by minimal image (valid while triangles stay
// well below half the domain in diameter). Validates the torus invariants.
inline TriMesh2D make_tri_mesh(std::vector<Vec2> nodes, const std::vector<std::array<int, 3>>& tris) {
  TriMesh2D mesh;
  mesh.nodes = std::move(nodes);
  for (Vec2& p : mesh.nodes) p = wrap(p);
  mesh.tris.reserve(tris.size());
  for (const auto& t : tris) {
    TriCell c;
    c.v = t;
    c.off[0] = {0, 0};
    c.off[1] = detail::minimal_image_offset(mesh.nodes[t[0]], mesh.nodes[t[1]]);
    c.off[2] = detail::minimal_image_offset(mesh.nodes[t[0]], mesh.nodes[t[2]]);
    mesh.tris.push_back(c);
  }
  detail::build_edges_and_grid(mesh);
  return mesh;
}

// Seeded uniform Delaunay triangulation of the torus with approximately
// n_target_cells triangles (a torus triangulation of V vertices has exactly
// 2V cells). Points are a jittered staggered lattice replicated to a 3x3
// tile block; the planar Delaunay is quotiented back to the torus.
inline TriMesh2D build_periodic_delaunay(int n_target_cells, uint64_t seed) {
  if (n_target_cells < 8) throw std::invalid_argument("build_periodic_delaunay: need n_target_cells >= 8");
  // lattice dimensions: 2*gx*gy cells, prefer near-square aspect
  int best_gx = 2, best_gy = 2;
  double best_score = 1e300;
  for (int gx = 2; gx <= n_target_cells; ++gx) {
    for (int gy = 2; gy <= n_target_cells; ++gy) {
      if (2 * gx * gy > 2 * n_target_cells + 16) continue;
      const double count_err = std::abs(2.0 * gx * gy - n_target_cells);
      const double aspect = static_cast<double>(std::max(gx, gy)) / std::min(gx, gy);
      const double score = count_err * 10.0 + aspect;
      if (score < best_score) {
        best_score = score;
        best_gx = gx;
        best_gy = gy;
      }
    }
  }
  const int gx = best_gx, gy = best_gy;
  const int nv = gx * gy;

  std::string diag;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<Vec2> pts(nv);
    const double amp = 0.18 * std::min(1.0 / gx, 1.0 / gy);
    for (int j = 0; j < gy; ++j) {
      for (int i = 0; i < gx; ++i) {
        SplitMix64 rng = split_stream(seed, static_cast<uint64_t>(attempt) * 1000003ULL +
                                                static_cast<uint64_t>(j) * gx + i);
        const double sx = (j % 2 == 0) ? 0.25 : 0.75;
        pts[static_cast<std::size_t>(j) * gx + i] =
            wrap(Vec2{(i + sx) / gx + rng.next_uniform(-amp, amp),
                      (j + 0.5) / gy + rng.next_uniform(-amp, amp)});
      }
    }

    // 3x3 replication
    std::vector<Vec2> rep;
    rep.reserve(9 * nv);
    std::vector<std::array<int, 2>> rep_off;
    for (int oy = -1; oy <= 1; ++oy)
      for (int ox = -1; ox <= 1; ++ox)
        for (int k = 0; k < nv; ++k) {
          rep.push_back({pts[k].x + ox, pts[k].y + oy});
          rep_off.push_back({ox, oy});
        }
    const auto planar = detail::bowyer_watson(rep);

    // quotient: keep one representative per torus triangle
    using VKey = std::tuple<int, int, int>;        // (id, relx, rely)
    using TKey = std::array<VKey, 3>;
    std::set<TKey> seen;
    std::vector<std::array<int, 3>> tri_ids;
    std::vector<TriCell> cells;
    bool ok = true;
    for (const auto& t : planar) {
      bool touches_center = false;
      for (int k = 0; k < 3; ++k)
        if (rep_off[t[k]][0] == 0 && rep_off[t[k]][1] == 0) touches_center = true;
      if (!touches_center) continue;
      std::array<int, 3> ids;
      std::array<std::array<int, 2>, 3> offs;
      for (int k = 0; k < 3; ++k) {
        ids[k] = t[k] % nv;
        offs[k] = rep_off[t[k]];
      }
      // canonical key: cyclic rotation starting at the minimal (id, off) vertex,
      // offsets normalized relative to that vertex
      TKey best{};
      bool have = false;
      for (int r = 0; r < 3; ++r) {
        TKey cand;
        for (int k = 0; k < 3; ++k) {
          const int kk = (r + k) % 3;
          cand[k] = {ids[kk], offs[kk][0] - offs[r][0], offs[kk][1] - offs[r][1]};
        }
        if (!have || cand < best) {
          best = cand;
          have = true;
        }
      }
      if (seen.insert(best).second) {
        TriCell c;
        for (int k = 0; k < 3; ++k) {
          c.v[k] = std::get<0>(best[k]);
          c.off[k] = {std::get<1>(best[k]), std::get<2>(best[k])};
        }
        cells.push_back(c);
      }
    }
    if (static_cast<int>(cells.size()) != 2 * nv) {
      diag = "quotient produced " + std::to_string(cells.size()) + " cells, expected " + std::to_string(2 * nv);
      ok = false;
    }
    if (ok) {
      try {
        TriMesh2D mesh;
        mesh.nodes = pts;
        mesh.tris = std::move(cells);
        detail::build_edges_and_grid(mesh);
        return mesh;
      } catch (const std::exception& e) {
        diag = e.what();
      }
    }
  }
  throw GenerationError("build_periodic_delaunay failed after retries: " + diag);
}

struct LocateResult {
  int cell = -1;
  std::array<double, 3> bary{0.0, 0.0, 0.0};
};

inline std::array<double, 3> barycentric(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& q) {
  const double d11 = p1.x - p0.x, d12 = p2.x - p0.x;
  const double d21 = p1.y - p0.y, d22 = p2.y - p0.y;
  const double det = d11 * d22 - d12 * d21;
  const double rx = q.x - p0.x, ry = q.y - p0.y;
  const double b1 = (d22 * rx - d12 * ry) / det;
  const double b2 = (-d21 * rx + d11 * ry) / det;
  return {1.0 - b1 - b2, b1, b2};
}

// Containing cell of wrap(p) with barycentric coordinates; points on shared
// facets resolve to the lowest adjacent cell id.
inline LocateResult locate_cell(const TriMesh2D& mesh, const Vec2& p_in) {
  if (mesh.tris.empty()) throw InvalidStateError("locate_cell: empty mesh");
  const Vec2 p = wrap(p_in);
  const int gn = mesh.grid_n;
  int ix = std::min(gn - 1, static_cast<int>(std::floor(p.x * gn)));
  int iy = std::min(gn - 1, static_cast<int>(std::floor(p.y * gn)));
  const double tol = 1e-12;
  LocateResult best;
  double best_min_bary = -1e300;
  const auto& bin = mesh.grid[static_cast<std::size_t>(iy) * gn + ix];
  for (const auto& [t, off] : bin) {
    const Vec2 q{p.x - off[0], p.y - off[1]};
    const auto b = barycentric(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2), q);
    const double mb = std::min({b[0], b[1], b[2]});
    if (mb >= -tol) return {t, b};  // bins are sorted by cell id: first hit is lowest
    if (mb > best_min_bary) {
      best_min_bary = mb;
      best = {t, b};
    }
  }
  if (best.cell >= 0 && best_min_bary > -1e-9) return best;
  // robust fallback: scan all candidate images
  for (int t = 0; t < static_cast<int>(mesh.tris.size()); ++t) {
    for (int ox = -2; ox <= 2; ++ox)
      for (int oy = -2; oy <= 2; ++oy) {
        const Vec2 q{p.x + ox, p.y + oy};
        const auto b = barycentric(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2), q);
        const double mb = std::min({b[0], b[1], b[2]});
        if (mb > best_min_bary) {
          best_min_bary = mb;
          best = {t, b};
        }
      }
  }
  return best;
}

// ---------------------------------------------------------------------------
// mesh file format: line 1 "nv ne np"; nv lines "x y"; ne lines "i j k";
// np lines "a b" gluing node b onto node a.
// ---------------------------------------------------------------------------

inline void write_mesh(const TriMesh2D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_mesh: cannot open " + path);
  out.precision(17);
  out << mesh.nodes.size() << ' ' << mesh.tris.size() << " 0\n";
  for (const Vec2& p : mesh.nodes) out << p.x << ' ' << p.y << '\n';
  for (const TriCell& t : mesh.tris) out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  if (!out) throw IoError("write_mesh: write failed for " + path);
}

inline TriMesh2D read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_mesh: cannot open " + path);
  std::size_t nv = 0, ne = 0, np = 0;
  if (!(in >> nv >> ne >> np)) throw IoError("read_mesh: bad header in " + path);
  std::vector<Vec2> nodes(nv);
  for (std::size_t i = 0; i < nv; ++i)
    if (!(in >> nodes[i].x >> nodes[i].y)) throw IoError("read_mesh: bad node line in " + path);
  std::vector<std::array<int, 3>> tris(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    if (!(in >> tris[i][0] >> tris[i][1] >> tris[i][2])) throw IoError("read_mesh: bad cell line in " + path);
    for (int k = 0; k < 3; ++k)
      if (tris[i][k] < 0 || static_cast<std::size_t>(tris[i][k]) >= nv)
        throw InvalidConnectivityError("read_mesh: node id out of range");
  }
  std::vector<int> remap(nv);
  for (std::size_t i = 0; i < nv; ++i) remap[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < np; ++i) {
    int a, b;
    if (!(in >> a >> b)) throw IoError("read_mesh: bad identification line in " + path);
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= nv || static_cast<std::size_t>(b) >= nv)
      throw InvalidConnectivityError("read_mesh: identification id out of range");
    remap[b] = a;
  }
  // resolve chains, then compress ids
  for (std::size_t i = 0; i < nv; ++i) {
    int r = remap[i];
    while (remap[r] != r) r = remap[r];
    remap[i] = r;
  }
  std::vector<int> compact(nv, -1);
  std::vector<Vec2> glued;
  for (std::size_t i = 0; i < nv; ++i) {
    if (remap[i] == static_cast<int>(i)) {
      compact[i] = static_cast<int>(glued.size());
      glued.push_back(nodes[i]);
    }
  }
  for (auto& t : tris)
    for (int k = 0; k < 3; ++k) t[k] = compact[remap[t[k]]];
  return make_tri_mesh(std::move(glued), tris);
}

}  // namespace slmsr
