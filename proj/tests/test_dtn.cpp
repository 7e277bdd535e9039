#include <random>

#include "calderon/dtn.hpp"
#include "calderon/error.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace calderon;

namespace {

double max_entry_error(const DtNMap& a, const DtNMap& b, int band) {
  double e = 0.0;
  for (int m = -band; m <= band; ++m)
    for (int n = -band; n <= band; ++n) e = std::max(e, std::abs(a(m, n) - b(m, n)));
  return e;
}

// Outer-circle DtN eigenvalue of a radial map with inner eigenvalue lambda at
// radius r1, continued harmonically through the annulus r1 < r < rho.
double harmonic_continuation(int n, double lambda, double r1, double rho) {
  const int a = std::abs(n);
  if (a == 0) return 0.0;
  const double ratio = (a - r1 * lambda) / (a + r1 * lambda) * std::pow(r1, 2.0 * a);
  const double p = std::pow(rho, 2.0 * a);
  return a / rho * (p - ratio) / (p + ratio);
}

}  // namespace

TEST_CASE("dtn_unit is diag(|n| / radius)") {
  const auto g = make_disk_geometry(64, 1.0);
  const auto lam = dtn_unit(g, 16);
  CHECK(lam.matrix.rows() == 33);
  CHECK(lam(0, 0) == cplx(0.0));
  CHECK(lam(1, 1) == cplx(1.0));
  CHECK(lam(-3, -3) == cplx(3.0));
  CHECK(lam(2, 3) == cplx(0.0));
  const auto lam2 = dtn_unit(make_disk_geometry(64, 2.0), 16);
  CHECK(lam2(4, 4).real() == doctest::Approx(2.0));
  CHECK_THROWS_AS(dtn_unit(g, 32), Error);
  CHECK_THROWS_AS(dtn_unit(g, -1), Error);
}

TEST_CASE("apply_dtn on point values") {
  const auto g = make_disk_geometry(64, 1.0);
  const auto lam = dtn_unit(g, 16);
  const auto z2 = sample(g, [](cplx z) { return z * z; });
  CHECK((apply_dtn(lam, z2) - 2.0 * z2).norm() < 1e-12);
  ApplyReport rep;
  const auto high = sample(g, [](cplx z) { return std::pow(z, 20); });
  CHECK(apply_dtn(lam, high, &rep).norm() < 1e-12);
  CHECK(rep.truncated_norm > 0.5);
  CHECK_THROWS_AS(apply_dtn(lam, BoundaryFunction::Zero(32)), Error);

  // the point matrix carries the unit tail beyond max_mode
  const Eigen::MatrixXcd p = dtn_point_matrix(lam);
  CHECK((p * high - 20.0 * high).norm() < 1e-10);
}

TEST_CASE("dtn_fem(gamma = 1) converges to dtn_unit") {
  const auto g = make_disk_geometry(64, 1.0);
  const auto unit = dtn_unit(g, 8);
  const auto field = ConductivityField::unit();
  const double e32 = max_entry_error(dtn_fem(field, 32, g, 8), unit, 8);
  const double e64 = max_entry_error(dtn_fem(field, 64, g, 8), unit, 8);
  MESSAGE("unit FEM error, res 32: " << e32 << ", res 64: " << e64);
  CHECK(e64 < e32 / 3.0);
  CHECK(e64 < 2e-3);
}

TEST_CASE("dtn_fem matches the radial ODE eigenvalues of a centred bump") {
  const auto g = make_disk_geometry(64, 1.0);
  const auto field = ConductivityField::bumps({Bump{0.0, 0.8, 1.5}});
  FemOptions opt{64, true};
  const auto lam = dtn_fem(field, g, 8, opt);
  double err = 0.0, off = 0.0;
  for (int n = -8; n <= 8; ++n) {
    err = std::max(err, std::abs(lam(n, n).real() - testing::radial_dtn_eigenvalue(n, 0.8, 1.5)));
    for (int m = -8; m <= 8; ++m)
      if (m != n) off = std::max(off, std::abs(lam(m, n)));
  }
  MESSAGE("radial oracle error: " << err << ", off-diagonal: " << off);
  CHECK(err < 2e-3);
  CHECK(off < 1e-3);
  CHECK(lam(1, 1).real() > 1.0);
}

TEST_CASE("invariants of a FEM map") {
  const auto g = make_disk_geometry(64, 1.0);
  const auto field = ConductivityField::bumps({Bump{{0.2, -0.1}, 0.5, 2.0}});
  const auto lam = dtn_fem(field, g, 12, FemOptions{48, false});
  const auto inv = check_invariants(lam);
  CHECK(inv.mode0_column < 1e-9);
  CHECK(inv.mode0_row < 1e-9);
  CHECK(inv.symmetry_defect < 1e-9);
  CHECK(inv.reality_defect < 1e-9);
  CHECK(inv.min_eigenvalue > 0.0);
}

TEST_CASE("dtn_fem rejects bad input") {
  const auto g = make_disk_geometry(64, 1.0);
  CHECK_THROWS_AS(dtn_fem(ConductivityField::unit(), 2, g, 8), Error);
  CHECK_THROWS_AS(dtn_fem(ConductivityField::unit(), 32, g, 40), Error);
  CHECK_THROWS_AS(ConductivityField::custom([](cplx) { return -1.0; }, 0.5, -1.0), Error);
  const auto lies = ConductivityField::custom([](cplx z) { return std::abs(z) < 0.3 ? -1.0 : 1.0; }, 0.5, 0.5);
  CHECK_THROWS_AS(dtn_fem(lies, 32, g, 8), Error);
}

TEST_CASE("extension of the unit map is |n| / rho") {
  const auto inner = dtn_unit(make_disk_geometry(64, 1.0), 16);
  const auto outer_geom = make_disk_geometry(64, 1.5);
  ExtensionReport rep;
  const auto ext = extend_dtn(inner, ConductivityField::unit(), outer_geom, {}, &rep);
  CHECK(rep.method_used == ExtensionMethod::analytic);
  CHECK(max_entry_error(ext, dtn_unit(outer_geom, 16), 16) < 1e-10);
}

TEST_CASE("analytic and FEM-annulus extension of a bump map") {
  const auto g = make_disk_geometry(64, 1.0);
  const auto field = ConductivityField::bumps({Bump{0.0, 0.8, 1.5}});
  const auto inner = dtn_fem(field, g, 16, FemOptions{48, true});
  const auto outer_geom = make_disk_geometry(64, 1.5);

  ExtensionOptions analytic;
  analytic.method = ExtensionMethod::analytic;
  const auto a = extend_dtn(inner, ConductivityField::unit(), outer_geom, analytic);
  double err = 0.0;
  for (int n = -16; n <= 16; ++n)
    err = std::max(err, std::abs(a(n, n).real() - harmonic_continuation(n, inner(n, n).real(), 1.0, 1.5)));
  MESSAGE("analytic extension vs per-mode continuation: " << err);
  CHECK(err < 1e-6);

  ExtensionOptions fem;
  fem.method = ExtensionMethod::fem;
  const auto f = extend_dtn(inner, ConductivityField::unit(), outer_geom, fem);
  const double fe = max_entry_error(a, f, 16);
  MESSAGE("FEM-annulus extension vs analytic: " << fe);
  CHECK(fe < 1e-3);

  CHECK_THROWS_AS(extend_dtn(inner, field, outer_geom, analytic), Error);
  CHECK_THROWS_AS(extend_dtn(inner, ConductivityField::unit(), make_disk_geometry(64, 0.5)), Error);
}

TEST_CASE("JSON round trip") {
  const auto g = make_disk_geometry(32, 1.0);
  const auto lam = dtn_fem(ConductivityField::bumps({Bump{{0.1, 0.1}, 0.5, 1.8}}), 24, g, 6);
  const auto back = dtn_from_json(to_json(lam));
  CHECK(back.max_mode == 6);
  CHECK(back.geometry.n_nodes == 32);
  CHECK((back.matrix - lam.matrix).norm() == 0.0);
  CHECK_THROWS_AS(dtn_from_json(nlohmann::json{{"max_mode", 2}}), Error);
}
