#include "calderon/dbar.hpp"
#include "calderon/error.hpp"
#include "doctest.h"

using namespace calderon;

namespace {

ScatteringGrid smooth_dual(const KGrid& g, double amplitude) {
  ScatteringGrid d = zero_scattering(g);
  for (int ix = 0; ix < g.side(); ++ix)
    for (int iy = 0; iy < g.side(); ++iy)
      if (g.active(ix, iy)) {
        const cplx k = g.node(ix, iy);
        d.s21(ix, iy) = amplitude * std::exp(-std::norm(k)) * (1.0 + 0.3 * I * std::norm(k));
      }
  return d;
}

// Cell-area fractions of the disk |k| < rho; point samples of the indicator
// would limit the transform to first order.
Eigen::MatrixXcd disk_fractions(const KGrid& g, double rho) {
  const int s = g.side(), q = 16;
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(s, s);
  for (int ix = 0; ix < s; ++ix)
    for (int iy = 0; iy < s; ++iy) {
      int inside = 0;
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
          if (std::abs(g.node(ix, iy) + g.h_k * cplx((a + 0.5) / q - 0.5, (b + 0.5) / q - 0.5)) < rho) ++inside;
      f(ix, iy) = static_cast<double>(inside) / (q * q);
    }
  return f;
}

double disk_error(int m) {
  const auto g = make_k_grid(m, 2.0);
  const auto u = CauchyTransformK(g).apply(disk_fractions(g, 1.0));
  double err = 0.0;
  for (int ix = 0; ix < g.side(); ++ix)
    for (int iy = 0; iy < g.side(); ++iy) {
      const cplx k = g.node(ix, iy);
      const double r = std::abs(k);
      if ((r > 0.6 && r < 1.4) || r > 1.6) continue;
      const cplx exact = r < 1.0 ? std::conj(k) : 1.0 / k;
      err = std::max(err, std::abs(u(ix, iy) - exact));
    }
  return err;
}

double dbar_residual(int m, double& h) {
  const auto g = make_k_grid(m, 4.0);
  h = g.h_k;
  const auto d = smooth_dual(g, 0.8);
  const cplx z(0.3, -0.2);
  const auto mf = DbarSolver(d).solve(z, SolverConfig{1e-12, 1000, 50});
  double res = 0.0;
  for (int ix = 1; ix < g.side() - 1; ++ix)
    for (int iy = 1; iy < g.side() - 1; ++iy) {
      const cplx k = g.node(ix, iy);
      if (std::abs(k) > 2.5) continue;
      const cplx dx = (mf.values(ix + 1, iy) - mf.values(ix - 1, iy)) / (2.0 * h);
      const cplx dy = (mf.values(ix, iy + 1) - mf.values(ix, iy - 1)) / (2.0 * h);
      const cplx lhs = 0.5 * (dx + I * dy);
      const cplx rhs = twist(z, -k) * d.s21(ix, iy) * std::conj(mf.values(ix, iy));
      res = std::max(res, std::abs(lhs - rhs));
    }
  return res;
}

}  // namespace

TEST_CASE("zero scattering gives m = 1 exactly") {
  const auto g = make_k_grid(5, 4.0);
  DbarReport rep;
  const auto m = DbarSolver(zero_scattering(g)).solve({0.4, 0.2}, {}, &rep);
  CHECK((m.values.array() - 1.0).abs().maxCoeff() == 0.0);
  CHECK(evaluate_at_zero(m) == cplx(1.0));
  CHECK(rep.gmres.converged);
}

TEST_CASE("disk indicator transform matches the closed form to second order") {
  const double e6 = disk_error(6), e7 = disk_error(7), e8 = disk_error(8);
  MESSAGE("disk transform error m=6,7,8: " << e6 << " " << e7 << " " << e8);
  for (auto [m, e] : {std::pair{6, e6}, {7, e7}, {8, e8}}) {
    const double h = make_k_grid(m, 2.0).h_k;
    CHECK(e <= 0.1 * h * h);
  }
  CHECK(e8 < e6 / 4.0);
}

TEST_CASE("Cauchy transform is linear and matches the free function") {
  const auto g = make_k_grid(4, 2.0);
  const CauchyTransformK t(g);
  const Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(16, 16), b = Eigen::MatrixXcd::Random(16, 16);
  const cplx c(0.3, 2.0);
  CHECK((t.apply(c * a + b) - c * t.apply(a) - t.apply(b)).norm() < 1e-12 * (a.norm() + b.norm()));
  CHECK((cauchy_transform_k({g, a}).values - t.apply(a)).norm() == 0.0);
  CHECK_THROWS_AS(t.apply(Eigen::MatrixXcd::Zero(8, 8)), Error);
}

TEST_CASE("finite-difference dbar residual is second order") {
  double h6 = 0.0, h7 = 0.0;
  const double r6 = dbar_residual(6, h6), r7 = dbar_residual(7, h7);
  MESSAGE("dbar residual m=6: " << r6 << ", m=7: " << r7);
  CHECK(r6 <= h6 * h6 + 1e-8);
  CHECK(r7 <= h7 * h7 + 1e-8);
  CHECK(r7 < r6 / 3.0);
}

TEST_CASE("small data: first-order response is the transform of the data") {
  const auto g = make_k_grid(5, 4.0);
  const cplx z(-0.1, 0.5);
  const double eps = 1e-4;
  const auto m = DbarSolver(smooth_dual(g, eps)).solve(z, SolverConfig{1e-13, 500, 50});
  Eigen::MatrixXcd a(g.side(), g.side());
  const auto d = smooth_dual(g, eps);
  for (int ix = 0; ix < g.side(); ++ix)
    for (int iy = 0; iy < g.side(); ++iy) a(ix, iy) = twist(z, -g.node(ix, iy)) * d.s21(ix, iy);
  const Eigen::MatrixXcd born = CauchyTransformK(g).apply(a);
  const Eigen::MatrixXcd u = m.values.array() - 1.0;
  CHECK((u - born).cwiseAbs().maxCoeff() < 10.0 * eps * eps);
  CHECK(born.cwiseAbs().maxCoeff() > 0.1 * eps);
}

TEST_CASE("solver configuration and failures") {
  const auto c = solver_config_from_json({{"tol", 1e-6}, {"max_iter", 20}});
  CHECK(c.tol == 1e-6);
  CHECK(c.max_iter == 20);
  CHECK(c.restart == 50);
  CHECK(solver_config_from_json(to_json(c)).max_iter == 20);
  CHECK_THROWS_AS(solver_config_from_json({{"tol", -1.0}}), Error);
  CHECK_THROWS_AS(solver_config_from_json({{"max_iter", "x"}}), Error);

  const auto g = make_k_grid(5, 4.0);
  try {
    DbarSolver(smooth_dual(g, 2.0)).solve(0.0, SolverConfig{1e-14, 2, 2});
    FAIL("expected non-convergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numerical);
    CHECK(std::string(e.what()).find("did not converge") != std::string::npos);
  }
  ScatteringGrid bad = zero_scattering(g);
  bad.s21 = Eigen::MatrixXcd::Zero(4, 4);
  CHECK_THROWS_AS(DbarSolver{bad}, Error);
}
