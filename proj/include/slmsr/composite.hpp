#pragma once

#include <array>
#include <memory>
#include <vector>

#include "slmsr/errors.hpp"
#include "slmsr/fem.hpp"
#include "slmsr/mesh1d.hpp"
#include "slmsr/submesh2d.hpp"

namespace slmsr {

// Local multiscale basis on one cell: one fine nodal vector per coarse vertex.
struct MsBasis1D {
  std::array<std::vector<double>, 2> f;
};

struct MsBasis2D {
  std::array<std::vector<double>, 3> f;  // lattice-sized vectors
};

// Basis traces along one coarse edge, in canonical a->b order (size n+1).
// Slot 0 belongs to the basis of endpoint a, slot 1 to endpoint b.
struct EdgeTraces {
  std::array<std::vector<double>, 2> f;
};

// Global solution carrier: coarse weights plus the basis they multiply.
// With `hats` set the basis is the standard P1 basis of the coarse mesh.
struct Solution1D {
  std::shared_ptr<const CoarseMesh1D> coarse;
  int n_fine = 0;
  bool hats = true;
  double time = 0.0;
  std::vector<double> weights;
  std::shared_ptr<const std::vector<MsBasis1D>> basis;
  std::vector<std::vector<double>> fine_values;  // per cell, cached combination

  void refresh_fine_values() {
    if (hats) return;
    const int nc = coarse->n_cells;
    fine_values.assign(nc, {});
    for (int c = 0; c < nc; ++c) {
      const MsBasis1D& b = (*basis)[c];
      const double w0 = weights[coarse->left_node(c)];
      const double w1 = weights[coarse->right_node(c)];
      std::vector<double>& v = fine_values[c];
      v.resize(b.f[0].size());
      for (std::size_t l = 0; l < v.size(); ++l) v[l] = w0 * b.f[0][l] + w1 * b.f[1][l];
    }
  }
};

struct Sample1D {
  double value = 0.0;
  double gradient = 0.0;
};

inline Sample1D sample_global(const Solution1D& u, double x) {
  const CoarseMesh1D& mesh = *u.coarse;
  const int c = locate_cell_1d(mesh, x);
  const double p = wrap(x);
  double local = (p - mesh.nodes[c]) / mesh.H;
  if (local < 0.0) local = 0.0;
  if (local > 1.0) local = 1.0;
  if (u.hats) {
    const double w0 = u.weights[mesh.left_node(c)];
    const double w1 = u.weights[mesh.right_node(c)];
    return {w0 * (1.0 - local) + w1 * local, (w1 - w0) / mesh.H};
  }
  const std::vector<double>& v = u.fine_values[c];
  const int nf = u.n_fine;
  double r = local * nf;
  int j = static_cast<int>(r);
  if (j >= nf) j = nf - 1;
  if (j < 0) j = 0;
  const double t = r - j;
  const double hf = mesh.H / nf;
  return {v[j] * (1.0 - t) + v[j + 1] * t, (v[j + 1] - v[j]) / hf};
}

struct Solution2D {
  std::shared_ptr<const TriMesh2D> coarse;
  std::shared_ptr<const RefinedTopology> topo;  // null when hats
  bool hats = true;
  double time = 0.0;
  std::vector<double> weights;
  std::shared_ptr<const std::vector<MsBasis2D>> basis;
  std::vector<std::vector<double>> fine_values;

  void refresh_fine_values() {
    if (hats) return;
    const int nc = static_cast<int>(coarse->tris.size());
    fine_values.assign(nc, {});
    for (int c = 0; c < nc; ++c) {
      const MsBasis2D& b = (*basis)[c];
      const std::array<double, 3> w{weights[coarse->tris[c].v[0]], weights[coarse->tris[c].v[1]],
                                    weights[coarse->tris[c].v[2]]};
      std::vector<double>& v = fine_values[c];
      v.resize(b.f[0].size());
      for (std::size_t l = 0; l < v.size(); ++l)
        v[l] = w[0] * b.f[0][l] + w[1] * b.f[1][l] + w[2] * b.f[2][l];
    }
  }
};

struct Sample2D {
  double value = 0.0;
  Vec2 gradient;
};

// P1 interpolation inside the fine lattice cell containing barycentric (b1,b2).
inline Sample2D sample_lattice(const RefinedTopology& topo, const std::vector<double>& values, int cell,
                               double b1, double b2) {
  const int n = topo.n;
  double r = b1 * n, s = b2 * n;
  if (r < 0.0) r = 0.0;
  if (s < 0.0) s = 0.0;
  int i = static_cast<int>(r), j = static_cast<int>(s);
  if (i > n - 1) i = n - 1;
  if (j > n - 1) j = n - 1;
  if (i + j > n - 1) {
    int over = i + j - (n - 1);
    const int di = std::min(i, over);
    i -= di;
    j -= (over - di);
  }
  const double fr = r - i, fs = s - j;
  std::array<int, 3> ids;
  std::array<double, 3> bary;
  if (fr + fs <= 1.0) {
    ids = {lattice::index(n, i, j), lattice::index(n, i + 1, j), lattice::index(n, i, j + 1)};
    bary = {1.0 - fr - fs, fr, fs};
  } else {
    ids = {lattice::index(n, i + 1, j), lattice::index(n, i + 1, j + 1), lattice::index(n, i, j + 1)};
    bary = {1.0 - fs, fr + fs - 1.0, 1.0 - fr};
  }
  const auto& coords = topo.cell_coords[cell];
  const TriGeometry g({coords[ids[0]], coords[ids[1]], coords[ids[2]]});
  Sample2D out;
  for (int k = 0; k < 3; ++k) {
    out.value += bary[k] * values[ids[k]];
    out.gradient += values[ids[k]] * g.grad[k];
  }
  return out;
}

inline Sample2D sample_global(const Solution2D& u, const Vec2& x) {
  const TriMesh2D& mesh = *u.coarse;
  const LocateResult loc = locate_cell(mesh, x);
  if (u.hats) {
    const std::array<double, 3> w{u.weights[mesh.tris[loc.cell].v[0]], u.weights[mesh.tris[loc.cell].v[1]],
                                  u.weights[mesh.tris[loc.cell].v[2]]};
    const double value = w[0] * loc.bary[0] + w[1] * loc.bary[1] + w[2] * loc.bary[2];
    const TriGeometry g({mesh.corner(loc.cell, 0), mesh.corner(loc.cell, 1), mesh.corner(loc.cell, 2)});
    Vec2 grad{0.0, 0.0};
    for (int k = 0; k < 3; ++k) grad += w[k] * g.grad[k];
    return {value, grad};
  }
  return sample_lattice(*u.topo, u.fine_values[loc.cell], loc.cell, loc.bary[1], loc.bary[2]);
}

}  // namespace slmsr
