#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "slmsr/composite.hpp"
#include "slmsr/errors.hpp"
#include "slmsr/fem.hpp"
#include "slmsr/fields.hpp"
#include "slmsr/quadrature.hpp"

namespace slmsr {

enum class PropagationStrategy {
  FixedBoundary,   // boundary values pinned to the reconstructed traces
  EdgeEvolution,   // boundary values interpolated toward evolved edge traces
};

// Basis functions are evolved on a mesh whose nodes move linearly from the
// traced to the Eulerian positions; with the mesh following the flow the
// advection term drops out, leaving diffusion (plus the divergence reaction
// in conservative form). Implicit Euler with a lumped mass matrix keeps the
// discrete maximum principle on non-obtuse meshes.
inline MsBasis1D propagate_1d(const MsBasis1D& basis, const std::vector<double>& start,
                              const std::vector<double>& end, const CoefField& field, EquationForm form,
                              double t_n, double t_n1, int n_sub, const QuadRule1D& rule) {
  const int nn = static_cast<int>(start.size());
  if (static_cast<int>(end.size()) != nn || static_cast<int>(basis.f[0].size()) != nn)
    throw std::invalid_argument("propagate_1d: size mismatch");
  if (n_sub < 1) throw std::invalid_argument("propagate_1d: n_sub must be >= 1");
  const double dt = t_n1 - t_n;
  const double dtau = dt / n_sub;

  MsBasis1D out = basis;
  std::vector<double> x(nn);
  std::vector<double> diag(nn), off(nn - 1), lump(nn), react(nn);
  for (int s = 1; s <= n_sub; ++s) {
    const double theta = static_cast<double>(s) / n_sub;
    const double ts = t_n + theta * dt;
    for (int l = 0; l < nn; ++l) x[l] = (1.0 - theta) * start[l] + theta * end[l];
    for (int l = 0; l + 1 < nn; ++l)
      if (!(x[l + 1] > x[l])) throw PropagationError("propagate_1d: geometry inverted during motion");

    std::fill(lump.begin(), lump.end(), 0.0);
    std::fill(diag.begin(), diag.end(), 0.0);
    std::fill(off.begin(), off.end(), 0.0);
    for (int l = 0; l + 1 < nn; ++l) {
      const double h = x[l + 1] - x[l];
      lump[l] += 0.5 * h;
      lump[l + 1] += 0.5 * h;
      double a_int = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q)
        a_int += rule.weights[q] * field.diffusion_1d(x[l] + h * rule.points[q], ts);
      const double k = a_int / h;
      diag[l] += k;
      diag[l + 1] += k;
      off[l] -= k;
    }
    if (form == EquationForm::Conservative) {
      for (int l = 0; l < nn; ++l) react[l] = lump[l] * field.velocity_divergence(x[l], ts);
    } else {
      std::fill(react.begin(), react.end(), 0.0);
    }

    bool has_dynamics = false;
    for (int l = 0; l < nn && !has_dynamics; ++l)
      if (diag[l] != 0.0 || react[l] != 0.0) has_dynamics = true;
    if (!has_dynamics) continue;

    // (M + dtau (K + R)) phi = M phi_prev, endpoint rows pinned
    std::vector<double> ad(nn), ao(nn - 1);
    for (int l = 0; l < nn; ++l) ad[l] = lump[l] + dtau * (diag[l] + react[l]);
    for (int l = 0; l + 1 < nn; ++l) ao[l] = dtau * off[l];
    for (auto& f : out.f) {
      std::vector<double> di(ad.begin() + 1, ad.end() - 1);
      std::vector<double> oi(ao.begin() + 1, ao.end() - 1);
      std::vector<double> rhs(nn - 2);
      for (int l = 1; l + 1 < nn; ++l) rhs[l - 1] = lump[l] * f[l];
      rhs[0] -= ao[0] * f[0];
      rhs[nn - 3] -= ao[nn - 2] * f[nn - 1];
      const std::vector<double> sol = detail::solve_tridiag(di, oi, rhs);
      for (int l = 1; l + 1 < nn; ++l) f[l] = sol[l - 1];
    }
  }
  return out;
}

// Reduced evolution along a moving coarse edge: only the tangential part of
// the diffusion tensor acts, and in conservative form the arc-length
// derivative of the tangential velocity appears as a reaction coefficient.
// Endpoint values stay at the nodal delta constraints.
inline EdgeTraces propagate_edge_2d(const EdgeTraces& traces, const std::vector<Vec2>& start,
                                    const std::vector<Vec2>& end, const CoefField& field,
                                    EquationForm form, double t_n, double t_n1, int n_sub,
                                    const QuadRule1D& rule) {
  const int nn = static_cast<int>(start.size());
  if (static_cast<int>(end.size()) != nn || static_cast<int>(traces.f[0].size()) != nn)
    throw std::invalid_argument("propagate_edge_2d: size mismatch");
  const double dt = t_n1 - t_n;
  const double dtau = dt / n_sub;

  EdgeTraces out = traces;
  std::vector<Vec2> x(nn);
  std::vector<double> h(nn - 1), gamma(nn - 1);
  std::vector<double> diag(nn), off(nn - 1), lump(nn), react(nn);
  for (int s = 1; s <= n_sub; ++s) {
    const double theta = static_cast<double>(s) / n_sub;
    const double ts = t_n + theta * dt;
    for (int l = 0; l < nn; ++l)
      x[l] = Vec2{(1.0 - theta) * start[l].x + theta * end[l].x,
                  (1.0 - theta) * start[l].y + theta * end[l].y};

    std::fill(lump.begin(), lump.end(), 0.0);
    std::fill(diag.begin(), diag.end(), 0.0);
    std::fill(off.begin(), off.end(), 0.0);
    for (int l = 0; l + 1 < nn; ++l) {
      const Vec2 d = x[l + 1] - x[l];
      h[l] = d.norm();
      if (!(h[l] > 0.0)) throw SingularGeometryError("propagate_edge_2d: degenerate segment");
      const Vec2 tau = d * (1.0 / h[l]);
      lump[l] += 0.5 * h[l];
      lump[l + 1] += 0.5 * h[l];
      double a_int = 0.0;
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2 p = x[l] + rule.points[q] * d;
        a_int += rule.weights[q] * tau.dot(field.diffusion_2d(p, ts).apply(tau));
      }
      const double k = a_int / h[l];
      diag[l] += k;
      diag[l + 1] += k;
      off[l] -= k;
      gamma[l] = field.velocity_2d(x[l] + 0.5 * d, ts).dot(tau);
    }
    std::fill(react.begin(), react.end(), 0.0);
    if (form == EquationForm::Conservative) {
      for (int l = 1; l + 1 < nn; ++l)
        react[l] = lump[l] * (gamma[l] - gamma[l - 1]) / (0.5 * (h[l - 1] + h[l]));
    }

    bool has_dynamics = false;
    for (int l = 0; l < nn && !has_dynamics; ++l)
      if (diag[l] != 0.0 || react[l] != 0.0) has_dynamics = true;
    if (!has_dynamics) continue;

    std::vector<double> ad(nn), ao(nn - 1);
    for (int l = 0; l < nn; ++l) ad[l] = lump[l] + dtau * (diag[l] + react[l]);
    for (int l = 0; l + 1 < nn; ++l) ao[l] = dtau * off[l];
    for (auto& f : out.f) {
      std::vector<double> di(ad.begin() + 1, ad.end() - 1);
      std::vector<double> oi(ao.begin() + 1, ao.end() - 1);
      std::vector<double> rhs(nn - 2);
      for (int l = 1; l + 1 < nn; ++l) rhs[l - 1] = lump[l] * f[l];
      rhs[0] -= ao[0] * f[0];
      rhs[nn - 3] -= ao[nn - 2] * f[nn - 1];
      const std::vector<double> sol = detail::solve_tridiag(di, oi, rhs);
      for (int l = 1; l + 1 < nn; ++l) f[l] = sol[l - 1];
    }
  }
  return out;
}

struct PropagateCell2DInput {
  const MsBasis2D* basis = nullptr;               // at t^n on the traced geometry
  const std::vector<Vec2>* start = nullptr;       // traced positions
  const std::vector<Vec2>* end = nullptr;         // Eulerian positions
  const std::vector<std::array<int, 3>>* tris = nullptr;
  int n = 0;
  const CoefField* field = nullptr;
  EquationForm form = EquationForm::NonConservative;
  PropagationStrategy strategy = PropagationStrategy::FixedBoundary;
  // lattice-sized target boundary values at t^{n+1}; required for EdgeEvolution
  std::array<const std::vector<double>*, 3> boundary_end{nullptr, nullptr, nullptr};
  double t_n = 0.0, t_n1 = 0.0;
  int n_sub = 1;
  const QuadRuleTri* rule = nullptr;
};

inline MsBasis2D propagate_cell_2d(const PropagateCell2DInput& in) {
  const int n = in.n;
  const int nl = lattice::size(n);
  const auto& tris = *in.tris;
  if (in.strategy == PropagationStrategy::EdgeEvolution)
    for (int i = 0; i < 3; ++i)
      if (!in.boundary_end[i])
        throw std::invalid_argument("propagate_cell_2d: edge-evolution strategy needs evolved traces");
  const double dt = in.t_n1 - in.t_n;
  const double dtau = dt / in.n_sub;

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

  MsBasis2D out = *in.basis;
  std::vector<Vec2> x(nl);
  for (int s = 1; s <= in.n_sub; ++s) {
    const double theta = static_cast<double>(s) / in.n_sub;
    const double ts = in.t_n + theta * dt;
    for (int l = 0; l < nl; ++l)
      x[l] = Vec2{(1.0 - theta) * (*in.start)[l].x + theta * (*in.end)[l].x,
                  (1.0 - theta) * (*in.start)[l].y + theta * (*in.end)[l].y};

    Eigen::VectorXd lump = Eigen::VectorXd::Zero(nl);
    std::vector<Eigen::Triplet<double>> kt;
    kt.reserve(tris.size() * 9);
    for (const auto& tri : tris) {
      const double area2 = (x[tri[1]].x - x[tri[0]].x) * (x[tri[2]].y - x[tri[0]].y) -
                           (x[tri[2]].x - x[tri[0]].x) * (x[tri[1]].y - x[tri[0]].y);
      if (!(area2 > 0.0)) throw PropagationError("propagate_cell_2d: geometry inverted during motion");
      TriGeometry g({x[tri[0]], x[tri[1]], x[tri[2]]});
      const Eigen::Matrix3d kl =
          tri_stiffness(g, [&](const Vec2& p) { return in.field->diffusion_2d(p, ts); }, *in.rule);
      for (int r = 0; r < 3; ++r) {
        lump(tri[r]) += g.area / 3.0;
        for (int c = 0; c < 3; ++c) kt.emplace_back(tri[r], tri[c], kl(r, c));
      }
    }
    SparseMat stiff(nl, nl);
    stiff.setFromTriplets(kt.begin(), kt.end());

    Eigen::VectorXd react = Eigen::VectorXd::Zero(nl);
    if (in.form == EquationForm::Conservative)
      for (int l = 0; l < nl; ++l) react(l) = lump(l) * in.field->velocity_divergence(x[l], ts);

    double op_norm = react.cwiseAbs().maxCoeff();
    for (int k = 0; k < stiff.outerSize(); ++k)
      for (SparseMat::InnerIterator it(stiff, k); it; ++it) op_norm = std::max(op_norm, std::abs(it.value()));
    if (op_norm == 0.0) {
      for (int i = 0; i < 3; ++i) {
        if (in.strategy != PropagationStrategy::EdgeEvolution) continue;
        std::vector<double>& f = out.f[i];
        for (int id = 0; id < nl; ++id)
          if (int_idx[id] < 0)
            f[id] = (1.0 - theta) * (*in.basis).f[i][id] + theta * (*in.boundary_end[i])[id];
      }
      continue;
    }

    // interior system (M + dtau (K + R))
    std::vector<Eigen::Triplet<double>> st;
    for (int k = 0; k < stiff.outerSize(); ++k)
      for (SparseMat::InnerIterator it(stiff, k); it; ++it) {
        const int r = int_idx[it.row()], c = int_idx[it.col()];
        if (r >= 0 && c >= 0) st.emplace_back(r, c, dtau * it.value());
      }
    for (int k = 0; k < ni; ++k)
      st.emplace_back(k, k, lump(interior[k]) + dtau * react(interior[k]));
    SparseMat sys(ni, ni);
    sys.setFromTriplets(st.begin(), st.end());
    Eigen::SimplicialLDLT<SparseMat> ldlt(sys);
    if (ldlt.info() != Eigen::Success) throw PropagationError("propagate_cell_2d: factorization failed");

    for (int i = 0; i < 3; ++i) {
      std::vector<double>& f = out.f[i];
      // advance boundary values first (linear in time toward the target)
      std::vector<double> fb_new(nl, 0.0);
      for (int id = 0; id < nl; ++id) {
        if (int_idx[id] >= 0) continue;
        fb_new[id] = (in.strategy == PropagationStrategy::EdgeEvolution)
                         ? (1.0 - theta) * (*in.basis).f[i][id] + theta * (*in.boundary_end[i])[id]
                         : f[id];
      }
      Eigen::VectorXd rhs(ni);
      for (int k = 0; k < ni; ++k) rhs(k) = lump(interior[k]) * f[interior[k]];
      // boundary columns of K
      for (int k = 0; k < stiff.outerSize(); ++k)
        for (SparseMat::InnerIterator it(stiff, k); it; ++it) {
          const int r = int_idx[it.row()];
          if (r >= 0 && int_idx[it.col()] < 0)
            rhs(r) -= dtau * it.value() * fb_new[it.col()];
        }
      const Eigen::VectorXd sol = ldlt.solve(rhs);
      for (int k = 0; k < ni; ++k) f[interior[k]] = sol(k);
      for (int id = 0; id < nl; ++id)
        if (int_idx[id] < 0) f[id] = fb_new[id];
    }
  }
  return out;
}

}  // namespace slmsr
