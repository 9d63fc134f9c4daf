#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "slmsr/reconstruct.hpp"
#include "slmsr/rng.hpp"

using namespace slmsr;

namespace {

// test-side dense mass matrix of a 1D mesh
Eigen::MatrixXd dense_mass(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l + 1 < n; ++l) {
    const double h = x[l + 1] - x[l];
    m(l, l) += h / 3.0;
    m(l + 1, l + 1) += h / 3.0;
    m(l, l + 1) += h / 6.0;
    m(l + 1, l) += h / 6.0;
  }
  return m;
}

// independent KKT solve of the constrained 1D fit
std::array<Eigen::VectorXd, 2> kkt_oracle_1d(const std::vector<double>& x, const std::vector<double>& u,
                                             double a1, double a2, double al) {
  const int n = static_cast<int>(x.size());
  const Eigen::MatrixXd m = dense_mass(x);
  Eigen::VectorXd uv(n), p1(n), p2(n);
  for (int l = 0; l < n; ++l) {
    uv(l) = u[l];
    p2(l) = (x[l] - x[0]) / (x[n - 1] - x[0]);
    p1(l) = 1.0 - p2(l);
  }
  const int nv = 2 * n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nv + 4, nv + 4);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nv + 4);
  h.block(0, 0, n, n) = 2.0 * (a1 * a1 + al) * m;
  h.block(0, n, n, n) = 2.0 * a1 * a2 * m;
  h.block(n, 0, n, n) = 2.0 * a1 * a2 * m;
  h.block(n, n, n, n) = 2.0 * (a2 * a2 + al) * m;
  g.segment(0, n) = 2.0 * (a1 * m * uv + al * m * p1);
  g.segment(n, n) = 2.0 * (a2 * m * uv + al * m * p2);
  // constraints: phi1(0)=1, phi1(end)=0, phi2(0)=0, phi2(end)=1
  h(nv + 0, 0) = h(0, nv + 0) = 1.0;
  h(nv + 1, n - 1) = h(n - 1, nv + 1) = 1.0;
  h(nv + 2, n) = h(n, nv + 2) = 1.0;
  h(nv + 3, nv - 1) = h(nv - 1, nv + 3) = 1.0;
  g(nv + 0) = 1.0;
  g(nv + 1) = 0.0;
  g(nv + 2) = 0.0;
  g(nv + 3) = 1.0;
  const Eigen::VectorXd sol = Eigen::FullPivLU<Eigen::MatrixXd>(h).solve(g);
  return {sol.segment(0, n), sol.segment(n, n)};
}

double objective_1d(const std::vector<double>& x, const std::vector<double>& u, double a1, double a2,
                    double al, const std::vector<double>& f1, const std::vector<double>& f2) {
  const int n = static_cast<int>(x.size());
  const Eigen::MatrixXd m = dense_mass(x);
  Eigen::VectorXd uv(n), v1(n), v2(n), p1(n), p2(n);
  for (int l = 0; l < n; ++l) {
    uv(l) = u[l];
    v1(l) = f1[l];
    v2(l) = f2[l];
    p2(l) = (x[l] - x[0]) / (x[n - 1] - x[0]);
    p1(l) = 1.0 - p2(l);
  }
  const Eigen::VectorXd r = uv - a1 * v1 - a2 * v2;
  return r.dot(m * r) + al * (v1 - p1).dot(m * (v1 - p1)) + al * (v2 - p2).dot(m * (v2 - p2));
}

}  // namespace

TEST_CASE("1D reconstruction: exact-representation and regularizer-dominated limits") {
  // slightly distorted traced mesh
  std::vector<double> x(17);
  for (int l = 0; l <= 16; ++l) {
    const double t = l / 16.0;
    x[l] = 0.3 + 0.1 * t + 0.004 * std::sin(2.0 * kPi * t);
  }
  const RegularizerSpec reg(RegularizerKind::DeviationFromLinear, 0.1);

  // linear u with endpoint values (1,2): hats are optimal
  std::vector<double> u(17);
  for (int l = 0; l <= 16; ++l) u[l] = 1.0 + (x[l] - x[0]) / (x[16] - x[0]);
  const MsBasis1D hats = reconstruct_1d(x, u, 1.0, 2.0, reg);
  for (int l = 0; l <= 16; ++l) {
    const double p2 = (x[l] - x[0]) / (x[16] - x[0]);
    CHECK(hats.f[0][l] == Catch::Approx(1.0 - p2).margin(1e-12));
    CHECK(hats.f[1][l] == Catch::Approx(p2).margin(1e-12));
  }
  CHECK(hats.f[0][0] == 1.0);
  CHECK(hats.f[0][16] == 0.0);
  CHECK(hats.f[1][0] == 0.0);
  CHECK(hats.f[1][16] == 1.0);

  // zero endpoint values make the misfit independent of the basis: prior wins
  std::vector<double> bump(17, 0.0);
  for (int l = 1; l < 16; ++l) bump[l] = std::sin(kPi * (l / 16.0));
  const MsBasis1D prior = reconstruct_1d(x, bump, 0.0, 0.0, reg);
  for (int l = 0; l <= 16; ++l) {
    const double p2 = (x[l] - x[0]) / (x[16] - x[0]);
    CHECK(prior.f[0][l] == Catch::Approx(1.0 - p2).margin(1e-13));
    CHECK(prior.f[1][l] == Catch::Approx(p2).margin(1e-13));
  }
}

TEST_CASE("1D reconstruction matches a dense KKT oracle and improves the objective") {
  std::vector<double> x(33);
  SplitMix64 rng(41);
  for (int l = 0; l <= 32; ++l) {
    const double t = l / 32.0;
    x[l] = 0.5 + 0.125 * t + 0.002 * std::sin(2.0 * kPi * t + 0.3);
  }
  std::vector<double> u(33);
  for (int l = 0; l <= 32; ++l)
    u[l] = 2.0 + std::sin(60.0 * x[l]) * 0.8 + 0.2 * std::cos(180.0 * x[l]) + 0.05 * rng.next_unit();
  const double a1 = u.front(), a2 = u.back();
  const double alpha = 0.1;
  const MsBasis1D got =
      reconstruct_1d(x, u, a1, a2, RegularizerSpec(RegularizerKind::DeviationFromLinear, alpha));
  const auto oracle = kkt_oracle_1d(x, u, a1, a2, alpha);
  for (int l = 0; l <= 32; ++l) {
    CHECK(got.f[0][l] == Catch::Approx(oracle[0](l)).margin(1e-9));
    CHECK(got.f[1][l] == Catch::Approx(oracle[1](l)).margin(1e-9));
  }

  // optimality vs the standard hats (a feasible point)
  std::vector<double> h1(33), h2(33);
  for (int l = 0; l <= 32; ++l) {
    h2[l] = (x[l] - x[0]) / (x[32] - x[0]);
    h1[l] = 1.0 - h2[l];
  }
  const double j_got = objective_1d(x, u, a1, a2, alpha, got.f[0], got.f[1]);
  const double j_hats = objective_1d(x, u, a1, a2, alpha, h1, h2);
  CHECK(j_got <= j_hats * (1.0 + 1e-12));

  // KKT residual of the eliminated system (projected onto the interior)
  const Eigen::MatrixXd m = dense_mass(x);
  Eigen::VectorXd uv(33), f1(33), f2(33), p1(33), p2(33);
  for (int l = 0; l <= 32; ++l) {
    uv(l) = u[l];
    f1(l) = got.f[0][l];
    f2(l) = got.f[1][l];
    p2(l) = (x[l] - x[0]) / (x[32] - x[0]);
    p1(l) = 1.0 - p2(l);
  }
  const Eigen::VectorXd g1 =
      (a1 * a1 + alpha) * (m * f1) + a1 * a2 * (m * f2) - a1 * (m * uv) - alpha * (m * p1);
  const Eigen::VectorXd g2 =
      a1 * a2 * (m * f1) + (a2 * a2 + alpha) * (m * f2) - a2 * (m * uv) - alpha * (m * p2);
  double res = 0.0, scale = 0.0;
  for (int l = 1; l < 32; ++l) {
    res += g1(l) * g1(l) + g2(l) * g2(l);
    scale += uv(l) * uv(l);
  }
  CHECK(std::sqrt(res) <= 1e-10 * std::max(1.0, std::sqrt(scale)));
}

TEST_CASE("1D reconstruction: alpha to infinity recovers the prior") {
  std::vector<double> x(33), u(33);
  for (int l = 0; l <= 32; ++l) {
    const double t = l / 32.0;
    x[l] = 0.1 + 0.1 * t;
    u[l] = 1.0 + std::sin(40.0 * t);
  }
  const MsBasis1D got = reconstruct_1d(x, u, u.front(), u.back(),
                                       RegularizerSpec(RegularizerKind::DeviationFromLinear, 1e8));
  for (int l = 0; l <= 32; ++l) {
    const double p2 = (x[l] - x[0]) / (x[32] - x[0]);
    CHECK(std::abs(got.f[0][l] - (1.0 - p2)) < 1e-6);
    CHECK(std::abs(got.f[1][l] - p2) < 1e-6);
  }
}

TEST_CASE("1D reconstruction rejects bad input") {
  std::vector<double> x{0.0, 0.1, 0.05, 0.2};
  std::vector<double> u{0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(reconstruct_1d(x, u, 0.0, 0.0, RegularizerSpec{}), SingularGeometryError);
  std::vector<double> x2{0.0, 0.1, 0.2, 0.3};
  std::vector<double> u2{0.0, std::nan(""), 0.0, 0.0};
  CHECK_THROWS_AS(reconstruct_1d(x2, u2, 0.0, 0.0, RegularizerSpec{}), std::invalid_argument);
}

namespace {

// independent KKT solve of the edge fit (arc-length second-difference prior)
std::array<Eigen::VectorXd, 2> kkt_oracle_edge(const std::vector<Vec2>& q, const std::vector<double>& u,
                                               double a1, double a2, double al) {
  const int n = static_cast<int>(q.size());
  std::vector<double> s(n, 0.0);
  for (int l = 0; l + 1 < n; ++l) s[l + 1] = s[l] + (q[l + 1] - q[l]).norm();
  const Eigen::MatrixXd m = dense_mass(s);
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n - 2, n);
  Eigen::VectorXd w(n - 2);
  for (int l = 1; l + 1 < n; ++l) {
    const double hl = s[l] - s[l - 1], hr = s[l + 1] - s[l];
    const double sc = 2.0 / (hl + hr);
    d2(l - 1, l - 1) = sc / hl;
    d2(l - 1, l) = -sc * (1.0 / hl + 1.0 / hr);
    d2(l - 1, l + 1) = sc / hr;
    w(l - 1) = 0.5 * (hl + hr);
  }
  const Eigen::MatrixXd r = d2.transpose() * w.asDiagonal() * d2;
  Eigen::VectorXd uv(n);
  for (int l = 0; l < n; ++l) uv(l) = u[l];
  const int nv = 2 * n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nv + 4, nv + 4);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nv + 4);
  h.block(0, 0, n, n) = 2.0 * (a1 * a1 * m + al * r);
  h.block(0, n, n, n) = 2.0 * a1 * a2 * m;
  h.block(n, 0, n, n) = 2.0 * a1 * a2 * m;
  h.block(n, n, n, n) = 2.0 * (a2 * a2 * m + al * r);
  g.segment(0, n) = 2.0 * a1 * (m * uv);
  g.segment(n, n) = 2.0 * a2 * (m * uv);
  h(nv + 0, 0) = h(0, nv + 0) = 1.0;
  h(nv + 1, n - 1) = h(n - 1, nv + 1) = 1.0;
  h(nv + 2, n) = h(n, nv + 2) = 1.0;
  h(nv + 3, nv - 1) = h(nv - 1, nv + 3) = 1.0;
  g(nv + 0) = 1.0;
  g(nv + 3) = 1.0;
  const Eigen::VectorXd sol = Eigen::FullPivLU<Eigen::MatrixXd>(h).solve(g);
  return {sol.segment(0, n), sol.segment(n, n)};
}

}  // namespace

TEST_CASE("edge reconstruction: straight edge with linear data gives linear traces") {
  const int n = 16;
  std::vector<Vec2> q(n + 1);
  std::vector<double> u(n + 1);
  for (int l = 0; l <= n; ++l) {
    const double t = static_cast<double>(l) / n;
    q[l] = Vec2{0.2 + 0.3 * t, 0.1 + 0.1 * t};
    u[l] = 4.0 - 3.0 * t;
  }
  const EdgeTraces tr =
      reconstruct_edge_2d(q, u, 4.0, 1.0, RegularizerSpec(RegularizerKind::DiscreteHarmonic, 1e-3));
  for (int l = 0; l <= n; ++l) {
    const double t = static_cast<double>(l) / n;
    CHECK(tr.f[0][l] == Catch::Approx(1.0 - t).margin(1e-11));
    CHECK(tr.f[1][l] == Catch::Approx(t).margin(1e-11));
  }
}

TEST_CASE("edge reconstruction: penalty-dominated limit is arc-length linear") {
  const int n = 20;
  std::vector<Vec2> q(n + 1);
  std::vector<double> u(n + 1);
  SplitMix64 rng(5);
  std::vector<double> s(n + 1, 0.0);
  for (int l = 0; l <= n; ++l) {
    const double t = static_cast<double>(l) / n;
    q[l] = Vec2{0.2 + 0.25 * t, 0.1 + 0.08 * std::sin(kPi * t)};  // curved
    u[l] = rng.next_uniform(-1.0, 1.0);
  }
  for (int l = 0; l < n; ++l) s[l + 1] = s[l] + (q[l + 1] - q[l]).norm();
  const EdgeTraces tr = reconstruct_edge_2d(q, u, u.front(), u.back(),
                                            RegularizerSpec(RegularizerKind::DiscreteHarmonic, 1e8));
  for (int l = 0; l <= n; ++l) {
    const double t = s[l] / s[n];
    CHECK(std::abs(tr.f[0][l] - (1.0 - t)) < 1e-6);
    CHECK(std::abs(tr.f[1][l] - t) < 1e-6);
  }
}

TEST_CASE("edge reconstruction matches the dense KKT oracle") {
  const int n = 24;
  std::vector<Vec2> q(n + 1);
  std::vector<double> u(n + 1);
  SplitMix64 rng(6);
  for (int l = 0; l <= n; ++l) {
    const double t = static_cast<double>(l) / n;
    q[l] = Vec2{0.1 + 0.3 * t + 0.01 * std::sin(3.0 * t), 0.7 + 0.05 * std::sin(2.0 * kPi * t)};
    u[l] = rng.next_uniform(0.0, 2.0);
  }
  const double al = 1e-3;
  const EdgeTraces tr = reconstruct_edge_2d(q, u, u.front(), u.back(),
                                            RegularizerSpec(RegularizerKind::DiscreteHarmonic, al));
  const auto oracle = kkt_oracle_edge(q, u, u.front(), u.back(), al);
  for (int l = 0; l <= n; ++l) {
    CHECK(tr.f[0][l] == Catch::Approx(oracle[0](l)).margin(1e-9));
    CHECK(tr.f[1][l] == Catch::Approx(oracle[1](l)).margin(1e-9));
  }

  std::vector<Vec2> degen(3, Vec2{0.5, 0.5});
  std::vector<double> ud(3, 0.0);
  CHECK_THROWS_AS(reconstruct_edge_2d(degen, ud, 0.0, 0.0, RegularizerSpec{}), SingularGeometryError);
}

namespace {

struct CellFixture {
  int n = 8;
  std::vector<Vec2> coords;
  std::vector<std::array<int, 3>> tris;
  std::vector<int> boundary_ids;

  explicit CellFixture(bool distort) {
    coords.resize(lattice::size(n));
    tris = lattice::triangles(n);
    const Vec2 p0{0.1, 0.2}, p1{0.5, 0.25}, p2{0.25, 0.6};
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n - j; ++i) {
        const double r = static_cast<double>(i) / n, t = static_cast<double>(j) / n;
        Vec2 p{p0.x + (p1.x - p0.x) * r + (p2.x - p0.x) * t,
               p0.y + (p1.y - p0.y) * r + (p2.y - p0.y) * t};
        if (distort) {
          p.x += 0.004 * std::sin(7.0 * r + 3.0 * t);
          p.y += 0.004 * std::cos(5.0 * r - 2.0 * t);
        }
        coords[lattice::index(n, i, j)] = p;
      }
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n - j; ++i)
        if (!(i >= 1 && j >= 1 && i + j <= n - 1)) boundary_ids.push_back(lattice::index(n, i, j));
  }

  // lattice hat of corner k (barycentric coordinate)
  double hat(int k, int i, int j) const {
    const double b1 = static_cast<double>(i) / n, b2 = static_cast<double>(j) / n;
    return k == 0 ? 1.0 - b1 - b2 : (k == 1 ? b1 : b2);
  }
};

}  // namespace

TEST_CASE("cell reconstruction: linear data with straight edges returns the hats") {
  CellFixture fx(false);
  const int n = fx.n;
  std::vector<double> u(lattice::size(n));
  const double c0 = 1.0, c1 = 3.0, c2 = -2.0;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n - j; ++i)
      u[lattice::index(n, i, j)] = c0 * fx.hat(0, i, j) + c1 * fx.hat(1, i, j) + c2 * fx.hat(2, i, j);

  std::array<std::vector<double>, 3> bnd;
  for (int k = 0; k < 3; ++k) {
    bnd[k].assign(lattice::size(n), 0.0);
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n - j; ++i) bnd[k][lattice::index(n, i, j)] = fx.hat(k, i, j);
  }
  CellReconstructionInput in;
  in.traced_coords = &fx.coords;
  in.tris = &fx.tris;
  in.n = n;
  in.u_samples = &u;
  in.u_corners = {c0, c1, c2};
  in.boundary = {&bnd[0], &bnd[1], &bnd[2]};
  in.reg = RegularizerSpec(RegularizerKind::DiscreteHarmonic, 1e-3);
  const MsBasis2D basis = reconstruct_cell_2d(in);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n - j; ++i)
      for (int k = 0; k < 3; ++k)
        CHECK(basis.f[k][lattice::index(n, i, j)] == Catch::Approx(fx.hat(k, i, j)).margin(1e-10));
}

TEST_CASE("cell reconstruction: zero corner values give the harmonic extension") {
  CellFixture fx(true);
  const int n = fx.n;
  const int nl = lattice::size(n);
  std::vector<double> u(nl);
  SplitMix64 rng(9);
  for (int l = 0; l < nl; ++l) u[l] = rng.next_uniform(-1.0, 1.0);

  // random boundary traces with the required corner deltas
  std::array<std::vector<double>, 3> bnd;
  for (int k = 0; k < 3; ++k) {
    bnd[k].assign(nl, 0.0);
    for (int id : fx.boundary_ids) bnd[k][id] = rng.next_uniform(0.0, 1.0);
  }
  const std::array<int, 3> corners{lattice::index(n, 0, 0), lattice::index(n, n, 0),
                                   lattice::index(n, 0, n)};
  for (int k = 0; k < 3; ++k)
    for (int c = 0; c < 3; ++c) bnd[k][corners[c]] = (k == c) ? 1.0 : 0.0;

  CellReconstructionInput in;
  in.traced_coords = &fx.coords;
  in.tris = &fx.tris;
  in.n = n;
  in.u_samples = &u;
  in.u_corners = {0.0, 0.0, 0.0};
  in.boundary = {&bnd[0], &bnd[1], &bnd[2]};
  in.reg = RegularizerSpec(RegularizerKind::DiscreteHarmonic, 1e-3);
  const MsBasis2D basis = reconstruct_cell_2d(in);

  // direct harmonic-extension oracle: interior stiffness rows vanish
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nl, nl);
  for (const auto& tri : fx.tris) {
    const Vec2 p0 = fx.coords[tri[0]], p1 = fx.coords[tri[1]], p2 = fx.coords[tri[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    const Vec2 g1{(p2.y - p0.y) / det, -(p2.x - p0.x) / det};
    const Vec2 g2{-(p1.y - p0.y) / det, (p1.x - p0.x) / det};
    const Vec2 g0{-g1.x - g2.x, -g1.y - g2.y};
    const std::array<Vec2, 3> gr{g0, g1, g2};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) k(tri[r], tri[c]) += 0.5 * det * gr[r].dot(gr[c]);
  }
  std::vector<int> flag(nl, 0);
  for (int id : fx.boundary_ids) flag[id] = 1;
  std::vector<int> interior;
  for (int id = 0; id < nl; ++id)
    if (!flag[id]) interior.push_back(id);
  const int ni = static_cast<int>(interior.size());
  for (int kk = 0; kk < 3; ++kk) {
    Eigen::MatrixXd kii(ni, ni);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
    for (int a = 0; a < ni; ++a) {
      for (int b = 0; b < ni; ++b) kii(a, b) = k(interior[a], interior[b]);
      for (int id : fx.boundary_ids) rhs(a) -= k(interior[a], id) * bnd[kk][id];
    }
    const Eigen::VectorXd harm = kii.ldlt().solve(rhs);
    for (int a = 0; a < ni; ++a)
      CHECK(basis.f[kk][interior[a]] == Catch::Approx(harm(a)).margin(1e-9));
  }
}

TEST_CASE("cell reconstruction matches a dense KKT oracle on a distorted cell") {
  CellFixture fx(true);
  const int n = fx.n;
  const int nl = lattice::size(n);
  std::vector<double> u(nl);
  SplitMix64 rng(12);
  for (int l = 0; l < nl; ++l)
    u[l] = 1.0 + rng.next_uniform(-0.5, 0.5) + 0.3 * std::sin(40.0 * fx.coords[l].x);

  std::array<std::vector<double>, 3> bnd;
  for (int kk = 0; kk < 3; ++kk) {
    bnd[kk].assign(nl, 0.0);
    for (int id : fx.boundary_ids) bnd[kk][id] = rng.next_uniform(0.0, 1.0);
  }
  const std::array<int, 3> corners{lattice::index(n, 0, 0), lattice::index(n, n, 0),
                                   lattice::index(n, 0, n)};
  for (int kk = 0; kk < 3; ++kk)
    for (int c = 0; c < 3; ++c) bnd[kk][corners[c]] = (kk == c) ? 1.0 : 0.0;

  const std::array<double, 3> a{u[corners[0]], u[corners[1]], u[corners[2]]};
  const double al = 1e-3;
  CellReconstructionInput in;
  in.traced_coords = &fx.coords;
  in.tris = &fx.tris;
  in.n = n;
  in.u_samples = &u;
  in.u_corners = a;
  in.boundary = {&bnd[0], &bnd[1], &bnd[2]};
  in.reg = RegularizerSpec(RegularizerKind::DiscreteHarmonic, al);
  const MsBasis2D basis = reconstruct_cell_2d(in);

  // dense KKT oracle with independently assembled mass/stiffness/lumping
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nl, nl), k = Eigen::MatrixXd::Zero(nl, nl);
  Eigen::VectorXd lump = Eigen::VectorXd::Zero(nl);
  for (const auto& tri : fx.tris) {
    const Vec2 p0 = fx.coords[tri[0]], p1 = fx.coords[tri[1]], p2 = fx.coords[tri[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    const double area = 0.5 * det;
    const Vec2 g1{(p2.y - p0.y) / det, -(p2.x - p0.x) / det};
    const Vec2 g2{-(p1.y - p0.y) / det, (p1.x - p0.x) / det};
    const Vec2 g0{-g1.x - g2.x, -g1.y - g2.y};
    const std::array<Vec2, 3> gr{g0, g1, g2};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        m(tri[r], tri[c]) += area / 12.0 * (r == c ? 2.0 : 1.0);
        k(tri[r], tri[c]) += area * gr[r].dot(gr[c]);
        lump(tri[r]) += area / 12.0 * (r == c ? 2.0 : 1.0);
      }
    }
  }
  std::vector<int> flag(nl, 0);
  for (int id : fx.boundary_ids) flag[id] = 1;
  std::vector<int> interior;
  for (int id = 0; id < nl; ++id)
    if (!flag[id]) interior.push_back(id);
  const int ni = static_cast<int>(interior.size());
  Eigen::MatrixXd kint = Eigen::MatrixXd::Zero(ni, nl);
  for (int r = 0; r < ni; ++r) kint.row(r) = k.row(interior[r]);
  Eigen::VectorXd winv(ni);
  for (int r = 0; r < ni; ++r) winv(r) = 1.0 / lump(interior[r]);
  const Eigen::MatrixXd reg = kint.transpose() * winv.asDiagonal() * kint;

  const int nb = static_cast<int>(fx.boundary_ids.size());
  const int nv = 3 * nl, ncon = 3 * nb;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nv + ncon, nv + ncon);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nv + ncon);
  Eigen::VectorXd uv(nl);
  for (int l = 0; l < nl; ++l) uv(l) = u[l];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) h.block(i * nl, j * nl, nl, nl) = 2.0 * a[i] * a[j] * m;
    h.block(i * nl, i * nl, nl, nl) += 2.0 * al * reg;
    g.segment(i * nl, nl) = 2.0 * a[i] * (m * uv);
    for (int b = 0; b < nb; ++b) {
      const int row = nv + i * nb + b;
      h(row, i * nl + fx.boundary_ids[b]) = 1.0;
      h(i * nl + fx.boundary_ids[b], row) = 1.0;
      g(row) = bnd[i][fx.boundary_ids[b]];
    }
  }
  const Eigen::VectorXd sol = Eigen::FullPivLU<Eigen::MatrixXd>(h).solve(g);
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < nl; ++l)
      CHECK(basis.f[i][l] == Catch::Approx(sol(i * nl + l)).margin(1e-8));

  // inconsistent corner values are rejected
  bnd[0][corners[1]] = 0.5;
  CHECK_THROWS_AS(reconstruct_cell_2d(in), ConformityError);
}
