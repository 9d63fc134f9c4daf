#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "slmsr/torus.hpp"

namespace slmsr {

// Quadrature on the reference interval [0,1]; weights sum to 1.
struct QuadRule1D {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;  // exact for polynomials up to this degree
};

// Quadrature on the reference triangle {(r,s): r,s>=0, r+s<=1}; weights sum to 1/2.
struct QuadRuleTri {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;
};

namespace detail {

// Gauss-Legendre nodes on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

}  // namespace detail

inline QuadRule1D gauss_rule_1d(int n_points) {
  if (n_points < 1) throw std::invalid_argument("gauss_rule_1d: need at least one point");
  std::vector<double> x, w;
  detail::gauss_legendre(n_points, x, w);
  QuadRule1D rule;
  rule.degree = 2 * n_points - 1;
  rule.points.resize(n_points);
  rule.weights.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    rule.points[i] = 0.5 * (x[i] + 1.0);
    rule.weights[i] = 0.5 * w[i];
  }
  return rule;
}

// Classic 6-point symmetric triangle rule, exact to degree 4. Used for all
// fine-cell assembly; cheap and accurate enough once cells resolve the data.
inline QuadRuleTri tri_rule_degree4() {
  QuadRuleTri rule;
  rule.degree = 4;
  const double a1 = 0.445948490915965, w1 = 0.223381589678011;
  const double a2 = 0.091576213509771, w2 = 0.109951743655322;
  const double b1 = 1.0 - 2.0 * a1, b2 = 1.0 - 2.0 * a2;
  rule.points = {{a1, a1}, {b1, a1}, {a1, b1}, {a2, a2}, {b2, a2}, {a2, b2}};
  rule.weights.assign(6, 0.0);
  for (int i = 0; i < 3; ++i) rule.weights[i] = 0.5 * w1;
  for (int i = 3; i < 6; ++i) rule.weights[i] = 0.5 * w2;
  return rule;
}

// Tensor rule collapsed onto the triangle via the Duffy map
// (u,v) -> (u(1-v), v) with Jacobian (1-v). Exact to the requested degree by
// construction from 1D Gauss rules; used where high order is required.
inline QuadRuleTri tri_rule_duffy(int degree) {
  const int nu = degree / 2 + 1;
  const int nv = degree + 1;
  const QuadRule1D gu = gauss_rule_1d(nu);
  const QuadRule1D gv = gauss_rule_1d(nv);
  QuadRuleTri rule;
  rule.degree = degree;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double u = gu.points[i], v = gv.points[j];
      rule.points.push_back({u * (1.0 - v), v});
      rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - v));
    }
  }
  return rule;
}

}  // namespace slmsr
