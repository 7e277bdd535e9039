#pragma once

#include <nlohmann/json.hpp>

#include "calderon/fft.hpp"
#include "calderon/gmres.hpp"
#include "calderon/scatter.hpp"

namespace calderon {

/// Samples of a function of k on a KGrid, entry (ix, iy) at grid.node(ix, iy).
struct KGridField {
  KGrid grid;
  Eigen::MatrixXcd values;
};

/// Discrete (1/pi) int f(k') / (k - k') dk' on a KGrid: FFT convolution with
/// h^2 / (pi k) over a cell zero-padded by a factor 2; the k = 0 kernel sample
/// is zero. Reusable and safe to call from several threads.
class CauchyTransformK {
 public:
  explicit CauchyTransformK(const KGrid& grid);
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& f) const;
  const KGrid& grid() const { return grid_; }

 private:
  KGrid grid_;
  Fft2d fft_;
  Eigen::MatrixXcd kernel_hat_;
};

KGridField cauchy_transform_k(const KGridField& field);

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 1000;
  int restart = 50;
};

nlohmann::json to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const nlohmann::json& j);

struct DbarReport {
  GmresReport gmres;
};

/// Solves (I - T[a conj(.)]) u = T a for u = m~+(z, .) - 1, with
/// a(k) = e(z, -k) S~21(k) and T the k-plane Cauchy transform. The operator
/// is real-linear, so GMRES runs on the realified system.
class DbarSolver {
 public:
  explicit DbarSolver(const ScatteringGrid& dual);

  KGridField solve(cplx z, const SolverConfig& config, DbarReport* report = nullptr) const;
  const KGrid& grid() const { return cauchy_.grid(); }
  const Eigen::MatrixXcd& s21_dual() const { return s21_; }

 private:
  CauchyTransformK cauchy_;
  Eigen::MatrixXcd s21_;
};

inline KGridField solve_dbar(const ScatteringGrid& s21_dual, cplx z, const SolverConfig& solver = {}) {
  return DbarSolver(s21_dual).solve(z, solver);
}

/// Sample at k = 0.
cplx evaluate_at_zero(const KGridField& field);

}  // namespace calderon
