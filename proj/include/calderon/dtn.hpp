#pragma once

#include <nlohmann/json.hpp>

#include "calderon/boundary.hpp"
#include "calderon/conductivity.hpp"

namespace calderon {

/// Dirichlet-to-Neumann map on a circle, in the Fourier basis exp(i n theta),
/// |n| <= max_mode:  Lambda exp(i n theta) = sum_m matrix(m + M, n + M) exp(i m theta).
struct DtNMap {
  int max_mode = 0;
  BoundaryGeometry geometry;
  Eigen::MatrixXcd matrix;

  double radius() const { return geometry.radius; }
  int index(int mode) const { return mode + max_mode; }
  cplx operator()(int m, int n) const { return matrix(index(m), index(n)); }
};

/// Lambda_1 on the disk: diagonal with |n| / radius.
DtNMap dtn_unit(const BoundaryGeometry& geom, int max_mode);

struct FemOptions {
  int mesh_resolution = 64;  // vertex rings of the disk mesh; boundary carries 6x that many vertices
  // Return Lambda_1 + (Lambda_gamma,h - Lambda_1,h), both discrete maps on the
  // same mesh, which cancels most of the discretization error common to both.
  bool reference_correction = false;
};

struct FemReport {
  int n_vertices = 0;
  int n_boundary_vertices = 0;
  double factorization_seconds = 0.0;
};

/// Lambda_gamma from P1 finite elements, entries from the energy form
/// (m, n) -> a(u_n, conj u_m) / (2 pi radius).
DtNMap dtn_fem(const ConductivityField& gamma, const BoundaryGeometry& geom, int max_mode,
               const FemOptions& options = {}, FemReport* report = nullptr);
inline DtNMap dtn_fem(const ConductivityField& gamma, int mesh_resolution, const BoundaryGeometry& geom,
                      int max_mode) {
  return dtn_fem(gamma, geom, max_mode, FemOptions{mesh_resolution, false});
}

struct ApplyReport {
  double truncated_norm = 0.0;  // l2 norm of input Fourier coefficients beyond max_mode
};

/// Lambda f on point values; modes beyond max_mode are dropped.
BoundaryFunction apply_dtn(const DtNMap& map, const BoundaryFunction& f, ApplyReport* report = nullptr);

/// Full-resolution Fourier multiplier matrix of Lambda on point values of the
/// map's geometry. Modes max_mode < |n| < n_nodes / 2 use the unit tail |n| / radius,
/// which is exact to within the smoothing part of Lambda_gamma - Lambda_1 when
/// gamma == 1 near the boundary.
Eigen::MatrixXcd dtn_point_matrix(const DtNMap& map);

enum class ExtensionMethod { automatic, analytic, fem };

struct ExtensionOptions {
  ExtensionMethod method = ExtensionMethod::automatic;
  int n_angular = 1024;  // FEM annulus path
  int n_radial = 0;      // 0: chosen to keep cells near-square
};

struct ExtensionReport {
  ExtensionMethod method_used = ExtensionMethod::analytic;
  double coupling_condition = 0.0;  // analytic path: cond(Lambda_in - diag(alpha))
};

/// DtN map of gamma' on the larger disk, where gamma' equals the inner
/// conductivity inside the inner circle and `gamma_annulus` outside it.
/// The analytic path requires gamma_annulus == 1.
DtNMap extend_dtn(const DtNMap& inner, const ConductivityField& gamma_annulus, const BoundaryGeometry& outer_geom,
                  const ExtensionOptions& options = {}, ExtensionReport* report = nullptr);

struct DtNInvariants {
  double mode0_column = 0.0;     // ||Lambda 1||
  double mode0_row = 0.0;        // largest |<Lambda e_n, 1>| / (2 pi r)
  double symmetry_defect = 0.0;  // max |L - L^H|
  double reality_defect = 0.0;   // max |L(-m,-n) - conj L(m,n)|
  double min_eigenvalue = 0.0;   // of the Hermitian part restricted to n != 0
};

DtNInvariants check_invariants(const DtNMap& map);

nlohmann::json to_json(const DtNMap& map);
/// The geometry's n_nodes comes from `n_nodes` when the file does not carry it.
DtNMap dtn_from_json(const nlohmann::json& j, int n_nodes = 0);

}  // namespace calderon
