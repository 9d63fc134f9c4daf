#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <sstream>
#include <vector>

#include "slmsr/errors.hpp"
#include "slmsr/quadrature.hpp"
#include "slmsr/torus.hpp"

namespace slmsr {

using SparseMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct LinearSystem {
  SparseMat matrix;
  Vector rhs;
  bool symmetric_hint = false;
};

enum class AdvectionForm {
  GradientOnTrial,  // integrals of phi_i (c . grad phi_j)
  GradientOnTest,   // integrals of (grad phi_i . c) phi_j
};

// ---- 1D segment (P1) -------------------------------------------------------

inline Eigen::Matrix2d seg_mass(double h) {
  if (!(h > 0.0)) throw SingularGeometryError("seg_mass: nonpositive length");
  Eigen::Matrix2d m;
  m << 2.0, 1.0, 1.0, 2.0;
  return (h / 6.0) * m;
}

template <class Coef>
inline Eigen::Matrix2d seg_stiffness(double xa, double xb, const Coef& a, const QuadRule1D& rule) {
  const double h = xb - xa;
  if (!(h > 0.0)) throw SingularGeometryError("seg_stiffness: nonpositive length");
  double a_int = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    a_int += rule.weights[q] * a(xa + h * rule.points[q]);
  Eigen::Matrix2d k;
  k << 1.0, -1.0, -1.0, 1.0;
  return (a_int / h) * k;
}

template <class Coef>
inline Eigen::Matrix2d seg_advection(double xa, double xb, const Coef& c, AdvectionForm form,
                                     const QuadRule1D& rule) {
  const double h = xb - xa;
  if (!(h > 0.0)) throw SingularGeometryError("seg_advection: nonpositive length");
  // phi_0 = 1-t, phi_1 = t; dphi = (-1, 1)/h
  double c0 = 0.0, c1 = 0.0;  // integrals of c*phi_0, c*phi_1 over the segment
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double t = rule.points[q];
    const double cv = rule.weights[q] * h * c(xa + h * t);
    c0 += cv * (1.0 - t);
    c1 += cv * t;
  }
  Eigen::Matrix2d m;
  if (form == AdvectionForm::GradientOnTrial) {
    m << -c0, c0, -c1, c1;
  } else {
    m << -c0, -c1, c0, c1;
  }
  return m / h;
}

// ---- 2D triangle (P1) ------------------------------------------------------

struct TriGeometry {
  std::array<Vec2, 3> p;
  double area = 0.0;
  std::array<Vec2, 3> grad;  // constant P1 gradients

  explicit TriGeometry(const std::array<Vec2, 3>& corners) : p(corners) {
    const Vec2 e1 = p[1] - p[0], e2 = p[2] - p[0];
    const double det = e1.x * e2.y - e2.x * e1.y;
    area = 0.5 * det;
    if (!(area > 0.0)) throw SingularGeometryError("triangle with nonpositive area");
    grad[1] = Vec2{e2.y, -e2.x} * (1.0 / det);
    grad[2] = Vec2{-e1.y, e1.x} * (1.0 / det);
    grad[0] = Vec2{-grad[1].x - grad[2].x, -grad[1].y - grad[2].y};
  }

  Vec2 map(const Vec2& ref) const {
    return {p[0].x + (p[1].x - p[0].x) * ref.x + (p[2].x - p[0].x) * ref.y,
            p[0].y + (p[1].y - p[0].y) * ref.x + (p[2].y - p[0].y) * ref.y};
  }
};

inline Eigen::Matrix3d tri_mass(const TriGeometry& g) {
  Eigen::Matrix3d m;
  m << 2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0;
  return (g.area / 12.0) * m;
}

template <class TensorCoef>
inline Eigen::Matrix3d tri_stiffness(const TriGeometry& g, const TensorCoef& a, const QuadRuleTri& rule) {
  Mat2 a_int{0.0, 0.0, 0.0};  // quadrature average of the tensor
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Mat2 aq = a(g.map(rule.points[q]));
    a_int.xx += rule.weights[q] * aq.xx;
    a_int.xy += rule.weights[q] * aq.xy;
    a_int.yy += rule.weights[q] * aq.yy;
  }
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k(i, j) = 2.0 * g.area * g.grad[i].dot(a_int.apply(g.grad[j]));
  return k;
}

template <class VelCoef>
inline Eigen::Matrix3d tri_advection(const TriGeometry& g, const VelCoef& c, AdvectionForm form,
                                     const QuadRuleTri& rule) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Vec2 ref = rule.points[q];
    const Vec2 cq = c(g.map(ref));
    const double w = 2.0 * g.area * rule.weights[q];
    const std::array<double, 3> lam{1.0 - ref.x - ref.y, ref.x, ref.y};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (form == AdvectionForm::GradientOnTrial)
          m(i, j) += w * lam[i] * cq.dot(g.grad[j]);
        else
          m(i, j) += w * g.grad[i].dot(cq) * lam[j];
      }
  }
  return m;
}

// ---- assembly --------------------------------------------------------------

// Scatter-add of per-cell local matrices; cells are committed in ascending id
// order so the result is independent of how locals were produced.
inline SparseMat assemble(int n_nodes, int n_cells,
                          const std::function<std::vector<int>(int)>& cell_nodes,
                          const std::function<Eigen::MatrixXd(int)>& local_producer) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < n_cells; ++c) {
    const std::vector<int> nodes = cell_nodes(c);
    const Eigen::MatrixXd local = local_producer(c);
    if (local.rows() != static_cast<int>(nodes.size()) || local.cols() != static_cast<int>(nodes.size()))
      throw InvalidConnectivityError("assemble: local matrix size mismatch");
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (nodes[i] < 0 || nodes[i] >= n_nodes || nodes[j] < 0 || nodes[j] >= n_nodes)
          throw InvalidConnectivityError("assemble: node index out of range");
        trips.emplace_back(nodes[i], nodes[j], local(i, j));
      }
  }
  SparseMat m(n_nodes, n_nodes);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

// ---- linear solve ----------------------------------------------------------

inline double matrix_inf_norm(const SparseMat& a) {
  Vector row_sums = Vector::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMat::InnerIterator it(a, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
  return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

// Direct sparse factorization up to 10^4 unknowns, preconditioned Krylov
// beyond that; verified by a residual check either way.
inline Vector solve(const LinearSystem& sys) {
  if (sys.matrix.rows() != sys.matrix.cols() || sys.matrix.rows() != sys.rhs.size())
    throw std::invalid_argument("solve: dimension mismatch");
  const int n = static_cast<int>(sys.matrix.rows());
  Vector x;
  bool ok = false;
  std::string detail;
  auto try_direct = [&]() {
    if (sys.symmetric_hint) {
      Eigen::SimplicialLDLT<SparseMat> ldlt(sys.matrix);
      if (ldlt.info() == Eigen::Success) {
        x = ldlt.solve(sys.rhs);
        ok = (ldlt.info() == Eigen::Success);
      } else {
        detail = "LDLT factorization failed";
      }
    }
    if (!ok) {
      Eigen::SparseLU<SparseMat> lu;
      lu.analyzePattern(sys.matrix);
      lu.factorize(sys.matrix);
      if (lu.info() == Eigen::Success) {
        x = lu.solve(sys.rhs);
        ok = (lu.info() == Eigen::Success);
      } else {
        detail = "LU factorization failed (singular matrix?)";
      }
    }
  };
  if (n <= 10000) {
    try_direct();
  } else {
    if (sys.symmetric_hint) {
      Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper> cg(sys.matrix);
      cg.setTolerance(1e-12);
      cg.setMaxIterations(4 * n);
      x = cg.solve(sys.rhs);
      ok = (cg.info() == Eigen::Success);
    } else {
      Eigen::BiCGSTAB<SparseMat, Eigen::IncompleteLUT<double>> bicg(sys.matrix);
      bicg.setTolerance(1e-12);
      bicg.setMaxIterations(4 * n);
      x = bicg.solve(sys.rhs);
      ok = (bicg.info() == Eigen::Success);
    }
    if (!ok) try_direct();
  }
  if (ok) {
    const double a_norm = matrix_inf_norm(sys.matrix);
    if (a_norm * x.norm() > 1e13 * std::max(sys.rhs.norm(), 1e-300))
      throw SolverError("solve: solution blow-up indicates a singular or indefinite system");
    const double resid = (sys.matrix * x - sys.rhs).norm();
    const double bound = 1e-10 * (a_norm * x.norm() + sys.rhs.norm());
    if (resid <= std::max(bound, 1e-300)) return x;
    std::ostringstream os;
    os << "solve: residual " << resid << " exceeds bound " << bound;
    throw SolverError(os.str());
  }
  throw SolverError("solve: " + (detail.empty() ? std::string("factorization failed") : detail));
}

}  // namespace slmsr
