#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "slmsr/mesh2d.hpp"

namespace slmsr {

// Boundary classification of a fine node inside a coarse triangle.
struct FineNodeTag {
  int coarse_vertex = -1;  // coarse node id if the node sits on a coarse vertex
  int coarse_edge = -1;    // coarse edge id if on a coarse edge (vertices excluded)
  int edge_index = -1;     // position 1..n-1 along the edge in canonical a->b order
};

// Uniform refinement of one coarse triangle into 4^levels congruent cells on
// the barycentric lattice {(i,j): i+j <= n}, n = 2^levels. Vertex 0 is the
// lattice origin, vertex 1 is (n,0), vertex 2 is (0,n).
struct FineSubmesh2D {
  int parent_cell = -1;
  int levels = 0;
  int n = 0;
  std::vector<Vec2> nodes;       // unwrapped, parent-triangle frame
  std::vector<Vec2> canonical;   // identity coordinates, bitwise-shared with neighbors
  std::vector<FineNodeTag> tags;
  std::vector<std::array<int, 3>> cells;
  std::vector<std::array<int, 3>> corner_lattice;   // not used; kept empty
};

namespace lattice {

inline int size(int n) { return (n + 1) * (n + 2) / 2; }

inline int index(int n, int i, int j) { return j * (n + 1) - j * (j - 1) / 2 + i; }

inline std::vector<std::array<int, 3>> triangles(int n) {
  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n - j; ++i) {
      tris.push_back({index(n, i, j), index(n, i + 1, j), index(n, i, j + 1)});
      if (i + j < n - 1)
        tris.push_back({index(n, i + 1, j), index(n, i + 1, j + 1), index(n, i, j + 1)});
    }
  }
  return tris;
}

// lattice ids along local edge l (opposite vertex l), ordered from vertex
// (l+1)%3 to vertex (l+2)%3
inline std::vector<int> edge_path(int n, int l) {
  std::vector<int> path(n + 1);
  for (int s = 0; s <= n; ++s) {
    switch (l) {
      case 0: path[s] = index(n, n - s, s); break;  // v1 -> v2
      case 1: path[s] = index(n, 0, n - s); break;  // v2 -> v0
      default: path[s] = index(n, s, 0); break;     // v0 -> v1
    }
  }
  return path;
}

}  // namespace lattice

// Shared refinement of every coarse cell: global fine-node enumeration with
// one owner per vertex/edge/interior node, canonical coordinates computed
// once so that neighboring cells hold bitwise-identical interface data.
struct RefinedTopology {
  const TriMesh2D* coarse = nullptr;
  int levels = 0;
  int n = 0;
  int n_global = 0;
  std::vector<std::array<int, 3>> local_tris;            // lattice connectivity, shared by all cells
  std::vector<std::vector<int>> cell_gids;               // per cell: lattice node -> global fine id
  std::vector<std::vector<Vec2>> cell_coords;            // per cell: lattice node -> frame coords
  std::vector<std::vector<Vec2>> cell_canonical;         // per cell: lattice node -> canonical coords
  std::vector<std::vector<FineNodeTag>> cell_tags;       // per cell: lattice node -> tag
  std::vector<std::array<std::vector<int>, 3>> cell_edge_paths;  // per cell, local edge -> lattice ids in canonical order
  std::vector<Vec2> global_coords;                       // canonical coords per global fine id

  int interior_count() const { return (n - 1) * (n - 2) / 2; }
  int lattice_size() const { return lattice::size(n); }
};

inline RefinedTopology build_refined_topology(const TriMesh2D& mesh, int levels) {
  if (levels < 1) throw std::invalid_argument("build_refined_topology: levels must be >= 1");
  RefinedTopology topo;
  topo.coarse = &mesh;
  topo.levels = levels;
  topo.n = 1 << levels;
  const int n = topo.n;
  const int V = static_cast<int>(mesh.nodes.size());
  const int E = static_cast<int>(mesh.edges.size());
  const int F = static_cast<int>(mesh.tris.size());
  const int per_edge = n - 1;
  const int per_cell = (n - 1) * (n - 2) / 2;
  topo.n_global = V + E * per_edge + F * per_cell;
  topo.local_tris = lattice::triangles(n);
  topo.global_coords.assign(topo.n_global, Vec2{});
  for (int v = 0; v < V; ++v) topo.global_coords[v] = mesh.nodes[v];

  // canonical edge nodes, computed once per coarse edge
  for (int e = 0; e < E; ++e) {
    const Vec2 pa = mesh.nodes[mesh.edges[e].a];
    const Vec2 d = mesh.edge_vector(e);
    for (int m = 1; m < n; ++m)
      topo.global_coords[V + e * per_edge + (m - 1)] =
          Vec2{pa.x + d.x * (static_cast<double>(m) / n), pa.y + d.y * (static_cast<double>(m) / n)};
  }

  topo.cell_gids.resize(F);
  topo.cell_coords.resize(F);
  topo.cell_canonical.resize(F);
  topo.cell_tags.resize(F);
  topo.cell_edge_paths.resize(F);
  const int nl = lattice::size(n);
  for (int t = 0; t < F; ++t) {
    auto& gids = topo.cell_gids[t];
    auto& coords = topo.cell_coords[t];
    auto& canon = topo.cell_canonical[t];
    auto& tags = topo.cell_tags[t];
    gids.assign(nl, -1);
    coords.assign(nl, Vec2{});
    canon.assign(nl, Vec2{});
    tags.assign(nl, FineNodeTag{});
    const Vec2 p0 = mesh.corner(t, 0), p1 = mesh.corner(t, 1), p2 = mesh.corner(t, 2);
    const std::array<Vec2, 3> pc{p0, p1, p2};
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n - j; ++i) {
        const int id = lattice::index(n, i, j);
        coords[id] = Vec2{p0.x + (p1.x - p0.x) * (static_cast<double>(i) / n) + (p2.x - p0.x) * (static_cast<double>(j) / n),
                          p0.y + (p1.y - p0.y) * (static_cast<double>(i) / n) + (p2.y - p0.y) * (static_cast<double>(j) / n)};
      }
    // corners: exact copies of the coarse vertex coordinates, frame = corner coords
    const std::array<int, 3> corner_ids{lattice::index(n, 0, 0), lattice::index(n, n, 0), lattice::index(n, 0, n)};
    for (int k = 0; k < 3; ++k) {
      const int id = corner_ids[k];
      gids[id] = mesh.tris[t].v[k];
      canon[id] = mesh.nodes[mesh.tris[t].v[k]];
      coords[id] = pc[k];
      tags[id].coarse_vertex = mesh.tris[t].v[k];
    }
    // edges: copy canonical values once per edge, shift into the cell frame
    for (int l = 0; l < 3; ++l) {
      const int e = mesh.tri_edges[t][l];
      const MeshEdge& ed = mesh.edges[e];
      const int A = mesh.tris[t].v[(l + 1) % 3];
      auto path = lattice::edge_path(n, l);  // ordered A -> B (local direction)
      if (A != ed.a) std::reverse(path.begin(), path.end());  // canonical order a -> b
      // integer frame shift: cell-frame position of endpoint a minus canonical
      const int la = (A == ed.a) ? (l + 1) % 3 : (l + 2) % 3;
      const Vec2 frame_a = pc[la];
      const std::array<int, 2> shift{static_cast<int>(std::lround(frame_a.x - mesh.nodes[ed.a].x)),
                                     static_cast<int>(std::lround(frame_a.y - mesh.nodes[ed.a].y))};
      for (int m = 1; m < n; ++m) {
        const int id = path[m];
        const int g = V + e * per_edge + (m - 1);
        gids[id] = g;
        canon[id] = topo.global_coords[g];
        coords[id] = Vec2{canon[id].x + shift[0], canon[id].y + shift[1]};
        tags[id].coarse_edge = e;
        tags[id].edge_index = m;
      }
      topo.cell_edge_paths[t][l] = std::move(path);
    }
    // interiors
    int c = 0;
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n - j; ++i) {
        const int id = lattice::index(n, i, j);
        const int g = V + E * per_edge + t * per_cell + c;
        gids[id] = g;
        canon[id] = coords[id];
        topo.global_coords[g] = coords[id];
        tags[id] = FineNodeTag{};
        ++c;
      }
  }
  return topo;
}

inline FineSubmesh2D refine_triangle_uniform(const TriMesh2D& mesh, int cell, int levels) {
  if (levels < 1) throw std::invalid_argument("refine_triangle_uniform: levels must be >= 1");
  if (cell < 0 || cell >= static_cast<int>(mesh.tris.size()))
    throw std::invalid_argument("refine_triangle_uniform: cell out of range");
  RefinedTopology topo = build_refined_topology(mesh, levels);
  FineSubmesh2D sub;
  sub.parent_cell = cell;
  sub.levels = levels;
  sub.n = topo.n;
  sub.nodes = topo.cell_coords[cell];
  sub.canonical = topo.cell_canonical[cell];
  sub.tags = topo.cell_tags[cell];
  sub.cells = topo.local_tris;
  return sub;
}

// Union of all refined cells as a torus mesh (the reference-resolution mesh).
inline TriMesh2D build_refined_mesh(const RefinedTopology& topo) {
  std::vector<Vec2> nodes(topo.global_coords.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = wrap(topo.global_coords[i]);
  std::vector<std::array<int, 3>> tris;
  tris.reserve(topo.cell_gids.size() * topo.local_tris.size());
  for (const auto& gids : topo.cell_gids)
    for (const auto& lt : topo.local_tris)
      tris.push_back({gids[lt[0]], gids[lt[1]], gids[lt[2]]});
  return make_tri_mesh(std::move(nodes), tris);
}

}  // namespace slmsr
