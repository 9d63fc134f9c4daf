#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "slmsr/errors.hpp"
#include "slmsr/torus.hpp"

namespace slmsr {

// Equispaced periodic partition of the unit circle [0,1).
struct CoarseMesh1D {
  int n_cells = 0;
  double H = 0.0;
  std::vector<double> nodes;  // node i = i / n_cells, in [0,1)

  int left_node(int cell) const { return cell; }
  int right_node(int cell) const { return (cell + 1) % n_cells; }
};

inline CoarseMesh1D build_coarse_mesh_1d(int n_cells) {
  if (n_cells < 2) throw std::invalid_argument("build_coarse_mesh_1d: n_cells must be >= 2");
  CoarseMesh1D mesh;
  mesh.n_cells = n_cells;
  mesh.H = 1.0 / static_cast<double>(n_cells);
  mesh.nodes.resize(n_cells);
  for (int i = 0; i < n_cells; ++i) mesh.nodes[i] = static_cast<double>(i) / static_cast<double>(n_cells);
  return mesh;
}

// Fine mesh inside one coarse cell. Node coordinates are unwrapped: the last
// cell ends at 1.0 rather than wrapping to 0. Endpoints are exact copies of
// the coarse node coordinates (left) and coarse node + cell span (right).
struct FineSubmesh1D {
  int parent_cell = -1;
  int n_fine = 0;
  std::vector<double> nodes;        // n_fine + 1 ascending positions
  std::vector<int> coarse_vertex;   // per node: coarse node id or -1

  double h() const { return (nodes.back() - nodes.front()) / n_fine; }
};

inline FineSubmesh1D build_fine_submesh_1d(const CoarseMesh1D& mesh, int cell, int n_fine) {
  if (n_fine < 2) throw std::invalid_argument("build_fine_submesh_1d: n_fine must be >= 2");
  if (cell < 0 || cell >= mesh.n_cells) throw std::invalid_argument("build_fine_submesh_1d: cell out of range");
  FineSubmesh1D sub;
  sub.parent_cell = cell;
  sub.n_fine = n_fine;
  sub.nodes.resize(n_fine + 1);
  sub.coarse_vertex.assign(n_fine + 1, -1);
  const double left = mesh.nodes[cell];
  const double right = (cell + 1 == mesh.n_cells) ? 1.0 : mesh.nodes[cell + 1];
  sub.nodes[0] = left;
  sub.nodes[n_fine] = right;
  for (int j = 1; j < n_fine; ++j)
    sub.nodes[j] = left + (right - left) * (static_cast<double>(j) / n_fine);
  sub.coarse_vertex[0] = mesh.left_node(cell);
  sub.coarse_vertex[n_fine] = mesh.right_node(cell);
  return sub;
}

// Cell containing wrap(x); ties on nodes resolved toward the lower cell id
// except that a point exactly on node 0 belongs to cell 0.
inline int locate_cell_1d(const CoarseMesh1D& mesh, double x) {
  if (mesh.n_cells == 0) throw InvalidStateError("locate_cell_1d: empty mesh");
  const double p = wrap(x);
  int cell = static_cast<int>(std::floor(p * mesh.n_cells));
  if (cell >= mesh.n_cells) cell = mesh.n_cells - 1;
  // a point bitwise equal to an interior node is shared; pick the lower cell
  if (cell > 0 && p == mesh.nodes[cell]) cell -= 1;
  return cell;
}

}  // namespace slmsr
