#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "slmsr/composite.hpp"
#include "slmsr/errors.hpp"
#include "slmsr/fem.hpp"

namespace slmsr {

enum class RegularizerKind {
  DeviationFromLinear,  // quadratic-mean distance to the linear prior
  DiscreteHarmonic,     // norm of the discrete (Laplace-Beltrami) second derivative
};

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::DeviationFromLinear;
  std::array<double, 3> alpha{0.1, 0.1, 0.1};

  RegularizerSpec() = default;
  RegularizerSpec(RegularizerKind k, double a) : kind(k), alpha{a, a, a} {
    if (!(a > 0.0)) throw std::invalid_argument("RegularizerSpec: weights must be positive");
  }
};

namespace detail {

// Solve a symmetric positive-definite tridiagonal system in place.
inline std::vector<double> solve_tridiag(std::vector<double> diag, std::vector<double> off,
                                         std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t k = 1; k < n; ++k) {
    const double w = off[k - 1] / diag[k - 1];
    diag[k] -= w * off[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) rhs[k] = (rhs[k] - off[k] * rhs[k + 1]) / diag[k];
  return rhs;
}

}  // namespace detail

// Fit the two local basis functions on a traced 1D cell so that their
// combination with the endpoint solution values reproduces the sampled
// solution, penalized toward the linear basis with the same endpoint values.
// Endpoint rows carry the nodal delta constraints and are eliminated.
inline MsBasis1D reconstruct_1d(const std::vector<double>& traced_nodes,
                                const std::vector<double>& u_samples, double u_left, double u_right,
                                const RegularizerSpec& reg) {
  const int nn = static_cast<int>(traced_nodes.size());
  if (nn < 3) throw std::invalid_argument("reconstruct_1d: need at least 3 nodes");
  if (static_cast<int>(u_samples.size()) != nn)
    throw std::invalid_argument("reconstruct_1d: sample count mismatch");
  for (int l = 0; l + 1 < nn; ++l)
    if (!(traced_nodes[l + 1] > traced_nodes[l]))
      throw SingularGeometryError("reconstruct_1d: traced geometry inverted");
  for (double v : u_samples)
    if (!std::isfinite(v)) throw std::invalid_argument("reconstruct_1d: non-finite sample");

  const double a1 = u_left, a2 = u_right;
  const std::array<double, 2> alpha{reg.alpha[0], reg.alpha[1]};

  // mass matrix of the traced fine mesh (tridiagonal)
  std::vector<double> md(nn, 0.0), mo(nn - 1, 0.0);
  for (int l = 0; l + 1 < nn; ++l) {
    const double h = traced_nodes[l + 1] - traced_nodes[l];
    md[l] += h / 3.0;
    md[l + 1] += h / 3.0;
    mo[l] = h / 6.0;
  }
  const auto mass_apply = [&](const std::vector<double>& v) {
    std::vector<double> out(nn, 0.0);
    for (int l = 0; l < nn; ++l) {
      out[l] = md[l] * v[l];
      if (l > 0) out[l] += mo[l - 1] * v[l - 1];
      if (l + 1 < nn) out[l] += mo[l] * v[l + 1];
    }
    return out;
  };

  // linear priors on the traced cell with the constrained endpoint values
  const double span = traced_nodes[nn - 1] - traced_nodes[0];
  std::vector<double> p1(nn), p2(nn);
  for (int l = 0; l < nn; ++l) {
    p2[l] = (traced_nodes[l] - traced_nodes[0]) / span;
    p1[l] = 1.0 - p2[l];
  }

  // stationarity: sum_j G_ij M phi_j = a_i M u + alpha_i M p_i, with
  // G = [[a1^2+al1, a1 a2], [a1 a2, a2^2+al2]]; same interior mass block in
  // every slot, so two tridiagonal solves and a 2x2 inversion suffice.
  std::array<std::vector<double>, 2> phi;
  phi[0] = p1;  // start from priors; boundary entries already correct
  phi[1] = p2;
  phi[0][0] = 1.0;
  phi[0][nn - 1] = 0.0;
  phi[1][0] = 0.0;
  phi[1][nn - 1] = 1.0;

  const double g11 = a1 * a1 + alpha[0], g12 = a1 * a2, g22 = a2 * a2 + alpha[1];
  const double det = g11 * g22 - g12 * g12;
  if (!(det > 0.0)) throw InternalError("reconstruct_1d: singular normal system");

  const std::vector<double> mu = mass_apply(u_samples);
  const std::vector<double> mp1 = mass_apply(p1);
  const std::vector<double> mp2 = mass_apply(p2);

  // right-hand sides over interior nodes, boundary columns moved across
  std::array<std::vector<double>, 2> rhs;
  for (int i = 0; i < 2; ++i) rhs[i].assign(nn - 2, 0.0);
  const std::array<const std::vector<double>*, 2> mp{&mp1, &mp2};
  const std::array<double, 2> a{a1, a2};
  for (int i = 0; i < 2; ++i) {
    for (int l = 1; l + 1 < nn; ++l) rhs[i][l - 1] = a[i] * mu[l] + alpha[i] * (*mp[i])[l];
    // boundary contributions: phi_1(0)=1, phi_2(end)=1, everything else 0
    const double g_i1 = (i == 0) ? g11 : g12;
    const double g_i2 = (i == 0) ? g12 : g22;
    rhs[i][0] -= g_i1 * mo[0] * 1.0;           // phi_1 at left endpoint
    rhs[i][nn - 3] -= g_i2 * mo[nn - 2] * 1.0;  // phi_2 at right endpoint
  }

  std::vector<double> mdi(md.begin() + 1, md.end() - 1);
  std::vector<double> moi(mo.begin() + 1, mo.end() - 1);
  const std::vector<double> z1 = detail::solve_tridiag(mdi, moi, rhs[0]);
  const std::vector<double> z2 = detail::solve_tridiag(mdi, moi, rhs[1]);

  for (int l = 1; l + 1 < nn; ++l) {
    phi[0][l] = (g22 * z1[l - 1] - g12 * z2[l - 1]) / det;
    phi[1][l] = (-g12 * z1[l - 1] + g11 * z2[l - 1]) / det;
  }
  MsBasis1D out;
  out.f = std::move(phi);
  return out;
}

// Edge reconstruction on the arc-length parameterization of a traced coarse
// edge; the regularizer is the second difference in arc length, so large
// weights drive the traces to arc-length-linear functions.
inline EdgeTraces reconstruct_edge_2d(const std::vector<Vec2>& polyline,
                                      const std::vector<double>& u_samples, double u_a, double u_b,
                                      const RegularizerSpec& reg) {
  const int nn = static_cast<int>(polyline.size());
  if (nn < 3) throw std::invalid_argument("reconstruct_edge_2d: need at least 3 nodes");
  if (static_cast<int>(u_samples.size()) != nn)
    throw std::invalid_argument("reconstruct_edge_2d: sample count mismatch");

  std::vector<double> s(nn, 0.0);
  for (int l = 0; l + 1 < nn; ++l) {
    const double h = (polyline[l + 1] - polyline[l]).norm();
    if (!(h > 0.0)) throw SingularGeometryError("reconstruct_edge_2d: degenerate edge segment");
    s[l + 1] = s[l] + h;
  }

  const int ni = nn - 2;
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nn, nn);
  for (int l = 0; l + 1 < nn; ++l) {
    const double h = s[l + 1] - s[l];
    mass(l, l) += h / 3.0;
    mass(l + 1, l + 1) += h / 3.0;
    mass(l, l + 1) += h / 6.0;
    mass(l + 1, l) += h / 6.0;
  }
  // interior second differences with lumped arc-length weights
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(ni, nn);
  Eigen::VectorXd wlump(ni);
  for (int l = 1; l + 1 < nn; ++l) {
    const double hl = s[l] - s[l - 1], hr = s[l + 1] - s[l];
    const double scale = 2.0 / (hl + hr);
    d2(l - 1, l - 1) = scale / hl;
    d2(l - 1, l) = -scale * (1.0 / hl + 1.0 / hr);
    d2(l - 1, l + 1) = scale / hr;
    wlump(l - 1) = 0.5 * (hl + hr);
  }
  const Eigen::MatrixXd r_full = d2.transpose() * wlump.asDiagonal() * d2;

  const std::array<double, 2> a{u_a, u_b};
  Eigen::VectorXd u(nn);
  for (int l = 0; l < nn; ++l) u(l) = u_samples[l];
  std::array<Eigen::VectorXd, 2> bnd;
  bnd[0] = Eigen::VectorXd::Zero(nn);
  bnd[0](0) = 1.0;
  bnd[1] = Eigen::VectorXd::Zero(nn);
  bnd[1](nn - 1) = 1.0;

  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(2 * ni, 2 * ni);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * ni);
  const auto interior = [nn](const Eigen::VectorXd& v) { return v.segment(1, nn - 2); };
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Eigen::MatrixXd block = a[i] * a[j] * mass.block(1, 1, ni, ni);
      if (i == j) block += reg.alpha[i] * r_full.block(1, 1, ni, ni);
      sys.block(i * ni, j * ni, ni, ni) = block;
      Eigen::VectorXd carry = a[i] * a[j] * (mass * bnd[j]);
      if (i == j) carry += reg.alpha[i] * (r_full * bnd[j]);
      rhs.segment(i * ni, ni) -= interior(carry);
    }
    rhs.segment(i * ni, ni) += a[i] * interior(mass * u);
  }
  const Eigen::VectorXd sol = Eigen::LDLT<Eigen::MatrixXd>(sys).solve(rhs);

  EdgeTraces out;
  for (int i = 0; i < 2; ++i) {
    out.f[i].assign(nn, 0.0);
    out.f[i][0] = (i == 0) ? 1.0 : 0.0;
    out.f[i][nn - 1] = (i == 0) ? 0.0 : 1.0;
    for (int l = 1; l + 1 < nn; ++l) out.f[i][l] = sol(i * ni + (l - 1));
  }
  return out;
}

// Geometry-independent inputs of one cell-interior reconstruction.
struct CellReconstructionInput {
  const std::vector<Vec2>* traced_coords = nullptr;       // lattice-sized
  const std::vector<std::array<int, 3>>* tris = nullptr;  // lattice connectivity
  int n = 0;                                              // lattice order
  const std::vector<double>* u_samples = nullptr;
  std::array<double, 3> u_corners{0.0, 0.0, 0.0};
  std::array<const std::vector<double>*, 3> boundary{nullptr, nullptr, nullptr};  // lattice-sized
  RegularizerSpec reg;
};

// Interior reconstruction with the edge traces as fixed boundary data. The
// regularizer is the stiffness-based discrete Laplacian of the traced mesh,
// so with vanishing corner weights the result is the discrete-harmonic
// extension of the traces.
inline MsBasis2D reconstruct_cell_2d(const CellReconstructionInput& in) {
  const int n = in.n;
  const int nl = lattice::size(n);
  const auto& coords = *in.traced_coords;
  const auto& u = *in.u_samples;

  const auto is_interior = [n](int i, int j) { return i >= 1 && j >= 1 && i + j <= n - 1; };
  std::vector<int> int_idx(nl, -1);
  std::vector<int> interior;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n - j; ++i) {
      const int id = lattice::index(n, i, j);
      if (is_interior(i, j)) {
        int_idx[id] = static_cast<int>(interior.size());
        interior.push_back(id);
      }
    }
  const int ni = static_cast<int>(interior.size());

  // mass, plain stiffness and lumped masses on the traced geometry
  std::vector<Eigen::Triplet<double>> mt, kt;
  Eigen::VectorXd lump = Eigen::VectorXd::Zero(nl);
  for (const auto& tri : *in.tris) {
    const TriGeometry g({coords[tri[0]], coords[tri[1]], coords[tri[2]]});
    const Eigen::Matrix3d ml = tri_mass(g);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        mt.emplace_back(tri[r], tri[c], ml(r, c));
        kt.emplace_back(tri[r], tri[c], g.area * g.grad[r].dot(g.grad[c]));
        lump(tri[r]) += ml(r, c);
      }
    }
  }
  SparseMat mass(nl, nl), stiff(nl, nl);
  mass.setFromTriplets(mt.begin(), mt.end());
  stiff.setFromTriplets(kt.begin(), kt.end());

  // interior restriction operators
  SparseMat restrict_int(ni, nl);
  {
    std::vector<Eigen::Triplet<double>> rt;
    rt.reserve(ni);
    for (int k = 0; k < ni; ++k) rt.emplace_back(k, interior[k], 1.0);
    restrict_int.setFromTriplets(rt.begin(), rt.end());
  }
  const SparseMat k_rows = restrict_int * stiff;                    // interior rows, all columns
  Eigen::VectorXd winv(ni);
  for (int k = 0; k < ni; ++k) winv(k) = 1.0 / lump(interior[k]);
  const SparseMat k_cols = SparseMat(k_rows * restrict_int.transpose());  // interior rows+cols
  const SparseMat reg_block = SparseMat(k_cols.transpose() * winv.asDiagonal() * k_cols);
  const SparseMat mass_int = SparseMat(restrict_int * mass * restrict_int.transpose());

  // boundary vectors (interior entries zero)
  std::array<Eigen::VectorXd, 3> bnd;
  for (int i = 0; i < 3; ++i) {
    bnd[i] = Eigen::VectorXd::Zero(nl);
    const auto& bv = *in.boundary[i];
    for (int id = 0; id < nl; ++id)
      if (int_idx[id] < 0) bnd[i](id) = bv[id];
  }
  // corner consistency across the supplied traces
  const std::array<int, 3> corners{lattice::index(n, 0, 0), lattice::index(n, n, 0),
                                   lattice::index(n, 0, n)};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const double want = (i == k) ? 1.0 : 0.0;
      if (std::abs(bnd[i](corners[k]) - want) > 1e-12)
        throw ConformityError("reconstruct_cell_2d: edge traces inconsistent at a corner");
    }

  Eigen::VectorXd uvec(nl);
  for (int id = 0; id < nl; ++id) uvec(id) = u[id];
  const Eigen::VectorXd mu_int = restrict_int * (mass * uvec);

  std::vector<Eigen::Triplet<double>> st;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * ni);
  const std::array<double, 3>& a = in.u_corners;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double aij = a[i] * a[j];
      if (aij != 0.0) {
        for (int k = 0; k < mass_int.outerSize(); ++k)
          for (SparseMat::InnerIterator it(mass_int, k); it; ++it)
            st.emplace_back(i * ni + static_cast<int>(it.row()), j * ni + static_cast<int>(it.col()),
                            aij * it.value());
      }
      Eigen::VectorXd carry = aij * (restrict_int * (mass * bnd[j]));
      if (i == j)
        carry += in.reg.alpha[i] * (k_cols.transpose() * (winv.asDiagonal() * (k_rows * bnd[j])));
      rhs.segment(i * ni, ni) -= carry;
    }
    for (int k = 0; k < reg_block.outerSize(); ++k)
      for (SparseMat::InnerIterator it(reg_block, k); it; ++it)
        st.emplace_back(i * ni + static_cast<int>(it.row()), i * ni + static_cast<int>(it.col()),
                        in.reg.alpha[i] * it.value());
    rhs.segment(i * ni, ni) += a[i] * mu_int;
  }
  SparseMat sys(3 * ni, 3 * ni);
  sys.setFromTriplets(st.begin(), st.end());
  Eigen::SimplicialLDLT<SparseMat> ldlt(sys);
  if (ldlt.info() != Eigen::Success)
    throw InternalError("reconstruct_cell_2d: singular normal system");
  const Eigen::VectorXd sol = ldlt.solve(rhs);

  MsBasis2D out;
  for (int i = 0; i < 3; ++i) {
    out.f[i].assign(nl, 0.0);
    for (int id = 0; id < nl; ++id)
      out.f[i][id] = (int_idx[id] >= 0) ? sol(i * ni + int_idx[id]) : bnd[i](id);
  }
  return out;
}

}  // namespace slmsr
