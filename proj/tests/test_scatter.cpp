#include <filesystem>

#include "calderon/error.hpp"
#include "calderon/scatter.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace calderon;

namespace {

const ConductivityField& bump() {
  static const ConductivityField f = ConductivityField::bumps({Bump{0.0, 0.8, 1.5}});
  return f;
}

const TraceSolver& bump_solver() {
  static const auto g = make_disk_geometry(64, 1.0);
  static const TraceSolver s(dtn_fem(bump(), g, 16, FemOptions{64, true}), g);
  return s;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("calderon_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("k-grid construction") {
  const auto grid = make_k_grid(6, 4.0);
  CHECK(grid.side() == 64);
  CHECK(grid.h_k == doctest::Approx(4.0 / 30.0));
  CHECK(grid.node(grid.origin(), grid.origin()) == cplx(0.0));
  int active = 0;
  for (int ix = 0; ix < 64; ++ix)
    for (int iy = 0; iy < 64; ++iy) {
      if (!grid.active(ix, iy)) continue;
      ++active;
      // closed under conjugation and negation
      CHECK(grid.active(ix, 64 - iy));
      CHECK(grid.active(64 - ix, 64 - iy));
      CHECK(ix > 0);
      CHECK(iy > 0);
    }
  CHECK(active > 2500);
  CHECK_THROWS_AS(make_k_grid(2, 4.0), Error);
  CHECK_THROWS_AS(make_k_grid(13, 4.0), Error);
  CHECK_THROWS_AS(make_k_grid(6, 4.0, 0.01), Error);  // too fine for R_k
  CHECK_THROWS_AS(make_k_grid(6, -1.0), Error);
}

TEST_CASE("q_from_gamma: closed form, finite differences, errors") {
  const auto q = q_from_gamma(bump());
  const auto qd = q_from_gamma(bump(), 1e-4, true);
  CHECK_FALSE(q.identically_zero);
  CHECK(q.support_radius == doctest::Approx(0.8));
  for (cplx z : {cplx(0.3, 0.1), cplx(-0.2, 0.5), cplx(0.0, -0.6)}) {
    const double r = std::abs(z);
    const double gp = bump_profile_derivative(r, 0.8, 1.5), gv = bump_profile(r, 0.8, 1.5);
    const cplx expect = -(std::conj(z) / r) * gp / (4.0 * gv);
    CHECK(std::abs(q(z) - expect) < 1e-12);
    CHECK(std::abs(qd(z) - expect) < 1e-6);
  }
  CHECK(q(cplx(0.9, 0.0)) == cplx(0.0));
  CHECK(q_from_gamma(ConductivityField::unit()).identically_zero);
  const auto bad = ConductivityField::custom([](cplx z) { return std::real(z); }, 0.5, 1e-3);
  CHECK_THROWS_AS(q_from_gamma(bad, 1e-4, true)(cplx(-0.2, 0.0)), Error);
}

TEST_CASE("unit conductivity has zero scattering") {
  const auto g = make_disk_geometry(64, 1.0);
  const TraceSolver solver(dtn_unit(g, 16), g);
  const auto grid = make_k_grid(4, 2.0);
  const auto s = compute_scattering_grid(solver, grid);
  CHECK(s.s12.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(s.s21.cwiseAbs().maxCoeff() < 1e-10);
  const auto q = q_from_gamma(ConductivityField::unit());
  const auto o = scattering_area_oracle(q, {1.0, 1.0}, 64);
  CHECK(std::abs(o.s21) == 0.0);
  CHECK(std::abs(o.s12) == 0.0);
}

TEST_CASE("boundary formula agrees with the area-integral oracle") {
  const auto q = q_from_gamma(bump());
  const auto& solver = bump_solver();
  for (cplx k : {cplx(0.0), cplx(0.8, -0.4), cplx(-1.5, 1.9), cplx(2.5, 1.0)}) {
    const auto t = solver.solve(k);
    const auto tc = solver.solve(std::conj(k));
    const auto b = scattering_from_traces(t, tc, solver.geometry(), k);
    const auto o = scattering_area_oracle(q, k, OracleConfig{});
    CHECK(o.first_column.converged);
    CHECK(o.second_column.converged);
    const double scale = std::max(std::abs(o.value.s21), 1e-3);
    CHECK(std::abs(b.s21 - o.value.s21) / scale < 1e-2);
    CHECK(std::abs(b.s12 - o.value.s12) / scale < 1e-2);
  }
  CHECK_THROWS_AS(scattering_from_traces(solver.solve(1.0), solver.solve(2.0), solver.geometry(), 1.0), Error);
}

TEST_CASE("Born approximation is linear in the contrast") {
  const cplx k(1.0, 0.5);
  OracleConfig born;
  born.resolution = 64;
  born.born = true;
  OracleConfig full = born;
  full.born = false;
  const auto small = q_from_gamma(ConductivityField::bumps({Bump{0.0, 0.8, 1.01}}));
  const auto smaller = q_from_gamma(ConductivityField::bumps({Bump{0.0, 0.8, 1.005}}));
  const auto b1 = scattering_area_oracle(small, k, born).value.s21;
  const auto b2 = scattering_area_oracle(smaller, k, born).value.s21;
  const auto f1 = scattering_area_oracle(small, k, full).value.s21;
  CHECK(std::abs(b1 - 2.0 * b2) < 2e-2 * std::abs(b1));
  CHECK(std::abs(f1 - b1) < 2e-2 * std::abs(b1));
}

TEST_CASE("scattering decays and the dual map is an involution") {
  const auto grid = make_k_grid(5, 4.0);
  const auto s = compute_scattering_grid(bump_solver(), grid, 2);
  double inner = 0.0, outer = 0.0;
  for (int ix = 0; ix < grid.side(); ++ix)
    for (int iy = 0; iy < grid.side(); ++iy) {
      if (!grid.active(ix, iy)) {
        CHECK(s.s21(ix, iy) == cplx(0.0));
        continue;
      }
      const double r = std::abs(grid.node(ix, iy));
      if (r <= 2.0) inner = std::max(inner, std::abs(s.s21(ix, iy)));
      if (r > 3.0) outer = std::max(outer, std::abs(s.s21(ix, iy)));
    }
  CHECK(outer < inner);

  const auto d = dual_scattering(s);
  const auto dd = dual_scattering(d);
  CHECK((dd.s12 - s.s12).norm() == 0.0);
  CHECK((dd.s21 - s.s21).norm() == 0.0);
  const int h = grid.half();
  CHECK(d.s21(h + 2, h + 1) == s.s12(h - 2, h + 1));

  auto broken = s;
  broken.s21(0, 3) = 1.0;
  CHECK_THROWS_AS(dual_scattering(broken), Error);
}

TEST_CASE("trace tables are deterministic and persist exactly") {
  const auto grid = make_k_grid(4, 2.0);
  const auto t1 = compute_traces(bump_solver(), grid, 1);
  const auto t4 = compute_traces(bump_solver(), grid, 4);
  REQUIRE(t1.traces.size() == t4.traces.size());
  for (std::size_t i = 0; i < t1.traces.size(); ++i) {
    CHECK((t1.traces[i].psi11 - t4.traces[i].psi11).norm() == 0.0);
    CHECK((t1.traces[i].psi21 - t4.traces[i].psi21).norm() == 0.0);
  }
  const auto back = trace_table_from_json(to_json(t1));
  CHECK(back.traces.size() == t1.traces.size());
  CHECK(back.at(grid.origin(), grid.origin())->k == cplx(0.0));
  CHECK(back.at(0, 0) == nullptr);

  const auto s = scattering_from_table(t1, bump_solver().geometry());
  const auto dir = temp_dir("scatter");
  write_scattering(s, dir / "s.bin", dir / "s.json", {{"note", "x"}});
  const auto r = read_scattering(dir / "s.bin", dir / "s.json");
  CHECK(r.grid.m == 4);
  CHECK(r.grid.h_k == s.grid.h_k);
  CHECK((r.s12 - s.s12).norm() == 0.0);
  CHECK((r.s21 - s.s21).norm() == 0.0);
  CHECK_THROWS_AS(read_scattering(dir / "missing.bin", dir / "s.json"), Error);
  std::filesystem::resize_file(dir / "s.bin", 100);
  CHECK_THROWS_AS(read_scattering(dir / "s.bin", dir / "s.json"), Error);
  std::filesystem::remove_all(dir);
}
