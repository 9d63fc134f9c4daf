#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "slmsr/errors.hpp"
#include "slmsr/mesh2d.hpp"
#include "slmsr/rng.hpp"
#include "slmsr/torus.hpp"

namespace slmsr {

inline constexpr double kPi = 3.14159265358979323846;

enum class EquationForm { NonConservative, Conservative };

// Velocity/diffusion evaluators for one test problem. All evaluators wrap
// their argument into the fundamental domain, are pure, and in the random
// cases are functions of the seed only.
struct CoefField {
  int dim = 1;
  std::string test_id;
  bool is_random = false;
  uint64_t seed = 0;

  std::function<double(double, double)> velocity_1d;
  std::function<double(double, double)> diffusion_1d;
  std::function<double(double, double)> div_velocity_1d;  // analytic when available

  std::function<Vec2(const Vec2&, double)> velocity_2d;
  std::function<Mat2(const Vec2&, double)> diffusion_2d;
  std::function<double(const Vec2&, double)> div_velocity_2d;

  double velocity_divergence(double x, double t) const {
    if (div_velocity_1d) return div_velocity_1d(x, t);
    const double h = 1e-5;
    return (velocity_1d(x + h, t) - velocity_1d(x - h, t)) / (2.0 * h);
  }

  double velocity_divergence(const Vec2& x, double t) const {
    if (div_velocity_2d) return div_velocity_2d(x, t);
    const double h = 1e-5;
    return (velocity_2d({x.x + h, x.y}, t).x - velocity_2d({x.x - h, x.y}, t).x) / (2.0 * h) +
           (velocity_2d({x.x, x.y + h}, t).y - velocity_2d({x.x, x.y - h}, t).y) / (2.0 * h);
  }
};

struct InitialCondition {
  int dim = 1;
  std::function<double(double)> eval_1d;
  std::function<double(const Vec2&)> eval_2d;
};

// ---- initial conditions ----------------------------------------------------

inline InitialCondition gaussian_ic_1d(double sigma, double mu) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_ic_1d: sigma must be positive");
  InitialCondition ic;
  ic.dim = 1;
  ic.eval_1d = [sigma, mu](double x) {
    const double d = wrap(x) - mu;
    return std::exp(-d * d / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi));
  };
  return ic;
}

inline InitialCondition gaussian_ic_2d(const Mat2& m, const Vec2& mu1, const Vec2& mu2) {
  const double det = m.xx * m.yy - m.xy * m.xy;
  if (!(det > 0.0) || !(m.xx > 0.0)) throw std::invalid_argument("gaussian_ic_2d: M must be positive definite");
  const Mat2 inv{m.yy / det, -m.xy / det, m.xx / det};
  const double scale = 1.0 / (2.0 * std::sqrt((2.0 * kPi) * (2.0 * kPi) * det));
  InitialCondition ic;
  ic.dim = 2;
  ic.eval_2d = [inv, mu1, mu2, scale](const Vec2& x_in) {
    const Vec2 x = wrap(x_in);
    double sum = 0.0;
    for (const Vec2& mu : {mu1, mu2}) {
      const Vec2 d{x.x - mu.x, x.y - mu.y};
      sum += std::exp(-0.5 * d.dot(inv.apply(d)));
    }
    return scale * sum;
  };
  return ic;
}

// ---- stream-function velocity (2D solenoidal test) --------------------------

inline Vec2 stream_velocity(const Vec2& x_in, double t) {
  const Vec2 x = wrap(x_in);
  const double ax = 2.0 * kPi * (x.x - t), ay = 2.0 * kPi * x.y;
  return {2.0 * kPi * std::sin(ax) * std::cos(ay), -2.0 * kPi * std::cos(ax) * std::sin(ay)};
}

// ---- random fields ----------------------------------------------------------

// Periodic piecewise-linear field with seeded nodal values. Plain variant:
// uniform draws rescaled so the sampled min/max hit the requested bounds
// exactly. Smooth variant: a smooth base disturbed by Gaussian noise of
// mean zero and the given variance.
struct RandomField1D {
  int n_knots = 0;
  std::vector<double> values;

  double eval(double x) const {
    const double p = wrap(x) * n_knots;
    int i = static_cast<int>(std::floor(p));
    if (i >= n_knots) i = n_knots - 1;
    const double t = p - i;
    // snap roundoff-level offsets so knots return their stored value exactly
    if (t < 1e-9) return values[i];
    if (t > 1.0 - 1e-9) return values[(i + 1) % n_knots];
    return values[i] * (1.0 - t) + values[(i + 1) % n_knots] * t;
  }

  double slope(double x) const {
    const double p = wrap(x) * n_knots;
    int i = static_cast<int>(std::floor(p));
    if (i >= n_knots) i = n_knots - 1;
    return (values[(i + 1) % n_knots] - values[i]) * n_knots;
  }
};

inline RandomField1D random_field_1d(uint64_t seed, int n_knots, double lo, double hi, bool smooth) {
  if (n_knots < 2) throw std::invalid_argument("random_field_1d: n_knots must be >= 2");
  if (!(lo < hi)) throw std::invalid_argument("random_field_1d: need min < max");
  RandomField1D f;
  f.n_knots = n_knots;
  f.values.resize(n_knots);
  if (smooth) {
    const double sigma = std::sqrt(0.1);
    for (int k = 0; k < n_knots; ++k) {
      SplitMix64 rng = split_stream(seed, static_cast<uint64_t>(k));
      const double x = static_cast<double>(k) / n_knots;
      f.values[k] = 0.5 + 0.25 * std::cos(2.0 * kPi * x) + sigma * rng.next_normal();
    }
  } else {
    double vmin = 1e300, vmax = -1e300;
    for (int k = 0; k < n_knots; ++k) {
      SplitMix64 rng = split_stream(seed, static_cast<uint64_t>(k));
      f.values[k] = rng.next_unit();
      vmin = std::min(vmin, f.values[k]);
      vmax = std::max(vmax, f.values[k]);
    }
    const double span = vmax - vmin;
    for (double& v : f.values) v = lo + (v - vmin) * (hi - lo) / span;
  }
  return f;
}

// Diagonal tensor, constant on each cell of a dedicated mesh, values rescaled
// to attain the requested range.
struct CellwiseDiffusion2D {
  std::shared_ptr<TriMesh2D> mesh;
  std::vector<double> values;

  Mat2 eval(const Vec2& x) const {
    const LocateResult loc = locate_cell(*mesh, x);
    return Mat2::isotropic(values[loc.cell]);
  }
};

inline CellwiseDiffusion2D random_cellwise_diffusion_2d(uint64_t seed, std::shared_ptr<TriMesh2D> mesh,
                                                        double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("random_cellwise_diffusion_2d: need min < max");
  CellwiseDiffusion2D d;
  d.mesh = std::move(mesh);
  const std::size_t n = d.mesh->tris.size();
  d.values.resize(n);
  double vmin = 1e300, vmax = -1e300;
  for (std::size_t k = 0; k < n; ++k) {
    SplitMix64 rng = split_stream(seed, k);
    d.values[k] = rng.next_unit();
    vmin = std::min(vmin, d.values[k]);
    vmax = std::max(vmax, d.values[k]);
  }
  for (double& v : d.values) v = lo + (v - vmin) * (hi - lo) / (vmax - vmin);
  return d;
}

// ---- the test catalog --------------------------------------------------------

namespace detail {

inline CoefField series_field_1d(const std::string& id) {
  CoefField f;
  f.dim = 1;
  f.test_id = id;
  if (id == "1d.series.a") {
    f.velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return 0.25 + 0.5 * std::cos(10 * kPi * x) + 0.25 * std::cos(74 * kPi * x) + 0.15 * std::cos(196 * kPi * x);
    };
    f.div_velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return -(5.0 * kPi) * std::sin(10 * kPi * x) - (18.5 * kPi) * std::sin(74 * kPi * x) -
             (29.4 * kPi) * std::sin(196 * kPi * x);
    };
    f.diffusion_1d = [](double x_in, double t) {
      const double x = wrap(x_in);
      return 1e-3 + 9e-4 * std::cos(10 * kPi * t) * std::cos(86 * kPi * x);
    };
  } else if (id == "1d.series.b") {
    f.velocity_1d = [](double x_in, double t) {
      const double x = wrap(x_in);
      return 0.5 * std::cos(2 * kPi * t) + 0.25 * std::cos(6 * kPi * t) * std::cos(8 * kPi * x) +
             0.125 * std::cos(4 * kPi * t) * std::cos(62 * kPi * x) + 0.125 * std::cos(150 * kPi * x);
    };
    f.div_velocity_1d = [](double x_in, double t) {
      const double x = wrap(x_in);
      return -(2.0 * kPi) * std::cos(6 * kPi * t) * std::sin(8 * kPi * x) -
             (7.75 * kPi) * std::cos(4 * kPi * t) * std::sin(62 * kPi * x) - (18.75 * kPi) * std::sin(150 * kPi * x);
    };
    f.diffusion_1d = [](double x_in, double t) {
      const double x = wrap(x_in);
      return 1e-3 + 9e-4 * std::cos(10 * kPi * t) * std::cos(86 * kPi * x);
    };
  } else if (id == "1d.series.c") {
    f.velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return 0.5 + 0.125 * std::cos(8 * kPi * x) + 0.125 * std::cos(62 * kPi * x) + 0.125 * std::cos(150 * kPi * x);
    };
    f.div_velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return -(1.0 * kPi) * std::sin(8 * kPi * x) - (7.75 * kPi) * std::sin(62 * kPi * x) -
             (18.75 * kPi) * std::sin(150 * kPi * x);
    };
    f.diffusion_1d = [](double x_in, double t) {
      const double x = wrap(x_in);
      return 1e-2 + 9e-3 * std::cos(10 * kPi * t) * std::cos(86 * kPi * x);
    };
  } else {  // 1d.series.d
    f.velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return 0.75 + 0.5 * std::cos(8 * kPi * x) + 0.25 * std::cos(62 * kPi * x) + 0.1 * std::cos(150 * kPi * x);
    };
    f.div_velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return -(4.0 * kPi) * std::sin(8 * kPi * x) - (15.5 * kPi) * std::sin(62 * kPi * x) -
             (15.0 * kPi) * std::sin(150 * kPi * x);
    };
    f.diffusion_1d = [](double x_in, double t) {
      const double x = wrap(x_in);
      return 1e-2 + 9e-3 * std::cos(10 * kPi * t) * std::cos(86 * kPi * x);
    };
  }
  return f;
}

inline Mat2 oscillatory_diffusion_2d(const Vec2& x_in) {
  // diagonal tensor between 1e-6 and ~2e-2; advection dominance is local
  const Vec2 x = wrap(x_in);
  return {0.01 * (1.0 - 0.9999 * std::sin(60.0 * kPi * x.x)), 0.0,
          0.01 * (1.0 - 0.9999 * std::sin(60.0 * kPi * x.y))};
}

}  // namespace detail

inline EquationForm default_form(const std::string& test_id) {
  if (test_id == "1d.series.c" || test_id == "1d.series.d" || test_id == "2d.div.conservative")
    return EquationForm::Conservative;
  return EquationForm::NonConservative;
}

inline CoefField make_test_field(const std::string& test_id, uint64_t seed = 1) {
  if (test_id == "1d.series.a" || test_id == "1d.series.b" || test_id == "1d.series.c" ||
      test_id == "1d.series.d")
    return detail::series_field_1d(test_id);

  CoefField f;
  f.test_id = test_id;
  if (test_id == "1d.unresolved") {
    f.dim = 1;
    f.velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return 0.5 + 0.25 * std::cos(8 * kPi * x) + 0.125 * std::cos(196 * kPi * x) +
             0.0625 * std::cos(210 * kPi * x);
    };
    f.div_velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return -(2.0 * kPi) * std::sin(8 * kPi * x) - (24.5 * kPi) * std::sin(196 * kPi * x) -
             (13.125 * kPi) * std::sin(210 * kPi * x);
    };
    f.diffusion_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return 1e-3 + 9e-4 * std::cos(174 * kPi * x);
    };
    return f;
  }
  if (test_id == "1d.resolved") {
    f.dim = 1;
    f.velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return 0.5 + 0.25 * std::cos(6 * kPi * x) + 0.125 * std::cos(10 * kPi * x) +
             0.0625 * std::cos(14 * kPi * x);
    };
    f.div_velocity_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return -(1.5 * kPi) * std::sin(6 * kPi * x) - (1.25 * kPi) * std::sin(10 * kPi * x) -
             (0.875 * kPi) * std::sin(14 * kPi * x);
    };
    f.diffusion_1d = [](double x_in, double) {
      const double x = wrap(x_in);
      return 1e-3 + 9e-4 * std::cos(16 * kPi * x);
    };
    return f;
  }
  if (test_id == "1d.random") {
    f.dim = 1;
    f.is_random = true;
    f.seed = seed;
    auto diff = std::make_shared<RandomField1D>(random_field_1d(seed, 1000, 1e-5, 1e-2, false));
    auto vel = std::make_shared<RandomField1D>(random_field_1d(seed + 1, 1000, 0.0, 1.0, true));
    f.velocity_1d = [vel](double x, double) { return vel->eval(x); };
    f.div_velocity_1d = [vel](double x, double) { return vel->slope(x); };
    f.diffusion_1d = [diff](double x, double) { return diff->eval(x); };
    return f;
  }
  if (test_id == "2d.solenoidal" || test_id == "2d.random") {
    f.dim = 2;
    f.velocity_2d = [](const Vec2& x, double t) { return stream_velocity(x, t); };
    f.div_velocity_2d = [](const Vec2&, double) { return 0.0; };
    if (test_id == "2d.random") {
      f.is_random = true;
      f.seed = seed;
      auto mesh = std::make_shared<TriMesh2D>(build_periodic_delaunay(256, seed ^ 0x9e3779b9ULL));
      auto diff = std::make_shared<CellwiseDiffusion2D>(
          random_cellwise_diffusion_2d(seed, mesh, 1e-5, 1e-1));
      f.diffusion_2d = [diff](const Vec2& x, double) { return diff->eval(x); };
    } else {
      f.diffusion_2d = [](const Vec2& x, double) { return detail::oscillatory_diffusion_2d(x); };
    }
    return f;
  }
  if (test_id == "2d.div.nonconservative") {
    f.dim = 2;
    f.velocity_2d = [](const Vec2& x_in, double t) {
      const Vec2 x = wrap(x_in);
      const double th = 2.0 * kPi * t;
      const double ax = 2.0 * kPi * (x.x - t), ay = 2.0 * kPi * x.y, bx = 2.0 * kPi * x.x;
      const double v1 = 2.0 * kPi * std::sin(ax) * std::cos(ay);
      const double v2 = -std::cos(ax) * std::sin(ay) * std::sin(bx);
      return Vec2{std::cos(th) * v1 + std::sin(th) * v2, -std::sin(th) * v1 + std::cos(th) * v2};
    };
    f.div_velocity_2d = [](const Vec2& x_in, double t) {
      const Vec2 x = wrap(x_in);
      const double th = 2.0 * kPi * t;
      const double ax = 2.0 * kPi * (x.x - t), ay = 2.0 * kPi * x.y, bx = 2.0 * kPi * x.x;
      const double tp = 2.0 * kPi;
      const double dv1_dx = tp * tp * std::cos(ax) * std::cos(ay);
      const double dv1_dy = -tp * tp * std::sin(ax) * std::sin(ay);
      const double dv2_dx = tp * std::sin(ax) * std::sin(ay) * std::sin(bx) -
                            tp * std::cos(ax) * std::sin(ay) * std::cos(bx);
      const double dv2_dy = -tp * std::cos(ax) * std::cos(ay) * std::sin(bx);
      return std::cos(th) * dv1_dx + std::sin(th) * dv2_dx - std::sin(th) * dv1_dy +
             std::cos(th) * dv2_dy;
    };
    f.diffusion_2d = [](const Vec2& x, double) { return detail::oscillatory_diffusion_2d(x); };
    return f;
  }
  if (test_id == "2d.div.conservative") {
    f.dim = 2;
    f.velocity_2d = [](const Vec2& x_in, double t) {
      const Vec2 x = wrap(x_in);
      const double sx = std::sin(2.0 * kPi * (x.x - t)), cx = std::cos(2.0 * kPi * (x.x - t));
      const double cy = std::cos(kPi * (x.y - 0.5));
      const double s = 2.0 * kPi / 5.0;
      return Vec2{s * sx * sx * cy * cy, s * 2.0 * sx * cx * cy * cy};
    };
    f.div_velocity_2d = [](const Vec2& x_in, double t) {
      const Vec2 x = wrap(x_in);
      const double sx = std::sin(2.0 * kPi * (x.x - t)), cx = std::cos(2.0 * kPi * (x.x - t));
      const double cy = std::cos(kPi * (x.y - 0.5)), sy = std::sin(kPi * (x.y - 0.5));
      const double s = 2.0 * kPi / 5.0;
      return s * (2.0 * sx * cx * 2.0 * kPi * cy * cy + 2.0 * sx * cx * 2.0 * cy * (-sy) * kPi);
    };
    f.diffusion_2d = [](const Vec2& x, double) { return detail::oscillatory_diffusion_2d(x); };
    return f;
  }
  throw std::invalid_argument("make_test_field: unknown test id '" + test_id + "'");
}

inline InitialCondition make_test_ic(const std::string& test_id) {
  if (test_id.rfind("1d.", 0) == 0) return gaussian_ic_1d(0.1, 0.5);
  if (test_id.rfind("2d.", 0) == 0)
    return gaussian_ic_2d(Mat2{0.03, 0.0, 0.03}, Vec2{1.0 / 3.0, 0.5}, Vec2{2.0 / 3.0, 0.5});
  throw std::invalid_argument("make_test_ic: unknown test id '" + test_id + "'");
}

// ---- Peclet number -----------------------------------------------------------

struct PecletReport {
  double global = 0.0;
  double local_min = 0.0;
  double local_max = 0.0;
};

// Ratio of advective to diffusive scale: |c| L / |A| in the L2 mean, sampled
// on a fixed midpoint grid at t = 0. The local range uses the pointwise speed
// against the smallest eigenvalue of the tensor.
inline PecletReport peclet(const CoefField& field, double L = 1.0) {
  PecletReport rep;
  if (field.dim == 1) {
    const int n = 1 << 12;
    double c2 = 0.0, a2 = 0.0;
    double lmin = 1e300, lmax = -1e300;
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) / n;
      const double c = field.velocity_1d(x, 0.0);
      const double a = field.diffusion_1d(x, 0.0);
      c2 += c * c;
      a2 += a * a;
      if (a > 0.0) {
        const double loc = std::abs(c) * L / a;
        lmin = std::min(lmin, loc);
        lmax = std::max(lmax, loc);
      }
    }
    const double cn = std::sqrt(c2 / n), an = std::sqrt(a2 / n);
    if (an == 0.0) throw DivisionError("peclet: diffusion norm is zero");
    rep.global = cn * L / an;
    rep.local_min = (lmin > lmax) ? 0.0 : lmin;
    rep.local_max = (lmin > lmax) ? 0.0 : lmax;
    return rep;
  }
  const int n = 1 << 7;
  double c2 = 0.0, a2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 x{(i + 0.5) / n, (j + 0.5) / n};
      const Vec2 c = field.velocity_2d(x, 0.0);
      const Mat2 a = field.diffusion_2d(x, 0.0);
      c2 += c.dot(c);
      a2 += a.xx * a.xx + 2.0 * a.xy * a.xy + a.yy * a.yy;
    }
  // local range on a finer prime-sized grid so narrow diffusivity dips are hit
  double lmin = 1e300, lmax = -1e300;
  const int nl = 1151;
  for (int i = 0; i < nl; ++i)
    for (int j = 0; j < nl; ++j) {
      const Vec2 x{(i + 0.5) / nl, (j + 0.5) / nl};
      const double ev = field.diffusion_2d(x, 0.0).min_eigenvalue();
      if (ev > 0.0) {
        const double loc = field.velocity_2d(x, 0.0).norm() * L / ev;
        lmin = std::min(lmin, loc);
        lmax = std::max(lmax, loc);
      }
    }
  const double cn = std::sqrt(c2 / (n * n)), an = std::sqrt(a2 / (n * n));
  if (an == 0.0) throw DivisionError("peclet: diffusion norm is zero");
  rep.global = cn * L / an;
  rep.local_min = (lmin > lmax) ? 0.0 : lmin;
  rep.local_max = (lmin > lmax) ? 0.0 : lmax;
  return rep;
}

}  // namespace slmsr
