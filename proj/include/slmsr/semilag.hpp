#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "slmsr/errors.hpp"
#include "slmsr/fields.hpp"
#include "slmsr/submesh2d.hpp"
#include "slmsr/torus.hpp"

namespace slmsr {

// Classical 4-stage Runge-Kutta for dx/ds = f(s, x) over [s0, s1].
template <class State, class Rhs>
inline State rk4(State x, double s0, double s1, int n_sub, const Rhs& f) {
  const double h = (s1 - s0) / n_sub;
  double s = s0;
  for (int k = 0; k < n_sub; ++k) {
    const State k1 = f(s, x);
    const State k2 = f(s + 0.5 * h, x + (0.5 * h) * k1);
    const State k3 = f(s + 0.5 * h, x + (0.5 * h) * k2);
    const State k4 = f(s + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s = s0 + (k + 1) * h;
  }
  return x;
}

// Departure point of x at t_n: the node is integrated backwards along the
// time-reversed velocity field from t_{n+1}. Positions stay unwrapped; the
// evaluators wrap internally.
template <class Vel, class State>
inline State trace_point(const State& x, const Vel& velocity, double t_n1, double t_n, int n_sub) {
  return rk4(x, -t_n1, -t_n, n_sub,
             [&](double s, const State& p) { return -1.0 * velocity(p, -s); });
}

template <class Vel, class State>
inline State advect_point_forward(const State& x, const Vel& velocity, double t_n, double t_n1, int n_sub) {
  return rk4(x, t_n, t_n1, n_sub, [&](double t, const State& p) { return 1.0 * velocity(p, t); });
}

struct TracedGeometry1D {
  int cell = -1;
  double t_from = 0.0, t_to = 0.0;  // t_from = t^{n+1} (departure side is t_to = t^n)
  std::vector<double> nodes;        // traced positions, unwrapped, same order as the submesh
};

struct TracedGeometry2D {
  int cell = -1;
  double t_from = 0.0, t_to = 0.0;
  std::vector<Vec2> nodes;
};

template <class Vel>
inline TracedGeometry1D trace_back_1d(int cell, const std::vector<double>& fine_nodes, const Vel& velocity,
                                      double t_n1, double t_n, int n_sub) {
  if (!(t_n < t_n1)) throw std::invalid_argument("trace_back: need t_n < t_n1");
  if (n_sub < 1) throw std::invalid_argument("trace_back: n_sub must be >= 1");
  TracedGeometry1D g;
  g.cell = cell;
  g.t_from = t_n1;
  g.t_to = t_n;
  g.nodes.resize(fine_nodes.size());
  for (std::size_t l = 0; l < fine_nodes.size(); ++l) {
    const double xt = trace_point(fine_nodes[l], velocity, t_n1, t_n, n_sub);
    if (!std::isfinite(xt))
      throw TraceError("trace_back_1d: non-finite trajectory at node " + std::to_string(l) +
                       " of cell " + std::to_string(cell));
    g.nodes[l] = xt;
  }
  return g;
}

template <class Vel>
inline TracedGeometry2D trace_back_2d(int cell, const std::vector<Vec2>& fine_nodes, const Vel& velocity,
                                      double t_n1, double t_n, int n_sub) {
  if (!(t_n < t_n1)) throw std::invalid_argument("trace_back: need t_n < t_n1");
  if (n_sub < 1) throw std::invalid_argument("trace_back: n_sub must be >= 1");
  TracedGeometry2D g;
  g.cell = cell;
  g.t_from = t_n1;
  g.t_to = t_n;
  g.nodes.resize(fine_nodes.size());
  for (std::size_t l = 0; l < fine_nodes.size(); ++l) {
    const Vec2 xt = trace_point(fine_nodes[l], velocity, t_n1, t_n, n_sub);
    if (!std::isfinite(xt.x) || !std::isfinite(xt.y))
      throw TraceError("trace_back_2d: non-finite trajectory at node " + std::to_string(l) +
                       " of cell " + std::to_string(cell));
    g.nodes[l] = xt;
  }
  return g;
}

struct CellMeasure {
  double measure = 0.0;
  bool inverted = false;
};

inline CellMeasure traced_cell_measure(const TracedGeometry1D& g) {
  CellMeasure m;
  for (std::size_t l = 0; l + 1 < g.nodes.size(); ++l) {
    const double h = g.nodes[l + 1] - g.nodes[l];
    if (h <= 0.0) m.inverted = true;
    m.measure += h;
  }
  return m;
}

inline CellMeasure traced_cell_measure(const TracedGeometry2D& g, const std::vector<std::array<int, 3>>& cells) {
  CellMeasure m;
  for (const auto& c : cells) {
    const Vec2& p0 = g.nodes[c[0]];
    const Vec2& p1 = g.nodes[c[1]];
    const Vec2& p2 = g.nodes[c[2]];
    const double a = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    if (a <= 0.0) m.inverted = true;
    m.measure += a;
  }
  return m;
}

}  // namespace slmsr
