#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "calderon/cgo.hpp"
#include "calderon/conductivity.hpp"
#include "calderon/gmres.hpp"

namespace calderon {

/// Square grid of spectral parameters k = h_k (a + i b), a, b in [-2^{m-1}, 2^{m-1} - 1].
/// k = 0 is always a node. Nodes with |k| <= R_k are active; the active set is
/// closed under k -> conj(k) and k -> -k.
struct KGrid {
  int m = 6;
  double h_k = 0.0;
  double R_k = 4.0;

  int side() const { return 1 << m; }
  int half() const { return 1 << (m - 1); }
  cplx node(int ix, int iy) const { return h_k * cplx(ix - half(), iy - half()); }
  bool active(int ix, int iy) const { return std::abs(node(ix, iy)) <= R_k * (1.0 + 1e-12); }
  int origin() const { return half(); }
};

/// h_k <= 0 selects R_k / (2^{m-1} - 2), which leaves two inactive rings of nodes.
KGrid make_k_grid(int m, double R_k, double h_k = 0.0);

/// Samples of S12 and S21 on a KGrid; entry (ix, iy) belongs to node(ix, iy).
struct ScatteringGrid {
  KGrid grid;
  Eigen::MatrixXcd s12;
  Eigen::MatrixXcd s21;
};

ScatteringGrid zero_scattering(const KGrid& grid);

/// q = -gamma^{-1/2} d(gamma^{1/2}) = -(d gamma) / (2 gamma), d = (d_x - i d_y) / 2.
struct PotentialField {
  std::function<cplx(cplx)> evaluate;
  double support_radius = 0.0;
  bool identically_zero = false;

  cplx operator()(cplx z) const { return identically_zero ? cplx{0.0} : evaluate(z); }
};

/// Uses the field's exact gradient when it has one, central differences of step
/// `grad_step` otherwise (`force_differences` skips the exact path).
PotentialField q_from_gamma(const ConductivityField& gamma, double grad_step = 1e-4, bool force_differences = false);

struct ScatteringValue {
  cplx s12{0.0};
  cplx s21{0.0};
};

/// Boundary quadrature
///   S12(k) = (i / 2 pi) int exp(-i z conj k) nu psi12 ds,
///   S21(k) = (i / 2 pi) int -exp(i conj(z k)) conj(nu) psi21 ds,
/// with psi12(., k) taken from the trace at conj k.
ScatteringValue scattering_from_traces(const CGOTrace& trace_k, const CGOTrace& trace_conj_k,
                                       const BoundaryGeometry& geom, cplx k);

struct TraceTable {
  KGrid grid;
  std::vector<int> node_of;      // side*side entries, index into traces or -1 when inactive
  std::vector<CGOTrace> traces;  // canonical order: ix major, iy minor

  const CGOTrace* at(int ix, int iy) const;
};

/// Solves the trace system at every active node, in parallel over nodes.
TraceTable compute_traces(const TraceSolver& solver, const KGrid& grid, int workers = 0);

ScatteringGrid scattering_from_table(const TraceTable& table, const BoundaryGeometry& geom, int workers = 0);

inline ScatteringGrid compute_scattering_grid(const TraceSolver& solver, const KGrid& grid, int workers = 0) {
  return scattering_from_table(compute_traces(solver, grid, workers), solver.geometry(), workers);
}

struct OracleConfig {
  int resolution = 128;      // samples per side of the periodized cell (power of two)
  double cell_factor = 2.2;  // cell side in units of the support diameter; must exceed 2
  bool born = false;         // single iteration, m = I inside the integrals
  GmresOptions gmres{1e-11, 600, 60};
};

struct OracleResult {
  ScatteringValue value;
  GmresReport first_column;
  GmresReport second_column;
};

/// Direct scattering on a z-grid. The first and second CGO columns solve
///   m11 = 1 + dbar^{-1}(q m21),        m21 = e(z,-k) d^{-1}(e(z,k) conj(q) m11),
///   m12 = e(z,conj k) dbar^{-1}(e(z,-conj k) q m22),  m22 = 1 + d^{-1}(conj(q) m12),
/// with the solid Cauchy transforms applied by FFT on a periodized cell, then
///   S21 = -(i/pi) int e(z,k) conj(q) m11,   S12 = (i/pi) int e(z,-conj k) q m22.
OracleResult scattering_area_oracle(const PotentialField& q, cplx k, const OracleConfig& config);
inline ScatteringValue scattering_area_oracle(const PotentialField& q, cplx k, int z_grid_resolution) {
  OracleConfig c;
  c.resolution = z_grid_resolution;
  return scattering_area_oracle(q, k, c).value;
}

/// S~(k) = S(-conj k)^T, i.e. S~21(k) = S12(-conj k), S~12(k) = S21(-conj k).
ScatteringGrid dual_scattering(const ScatteringGrid& grid);

/// Flat little-endian float64 array [component][ix][iy][re, im] with components
/// (s12, s21), plus a JSON sidecar with the grid parameters.
void write_scattering(const ScatteringGrid& grid, const std::filesystem::path& bin_path,
                      const std::filesystem::path& json_path, const nlohmann::json& extra = {});
ScatteringGrid read_scattering(const std::filesystem::path& bin_path, const std::filesystem::path& json_path);

nlohmann::json to_json(const TraceTable& table);
TraceTable trace_table_from_json(const nlohmann::json& j);

}  // namespace calderon
