#pragma once

#include <nlohmann/json.hpp>

#include "calderon/dtn.hpp"

namespace calderon {

enum class LayerVariant { plain, conjugate };

/// Nystrom matrix of the twisted single layer operator on the circle,
///   (S_k f)(z) = p.v. int f(zeta) g_k(zeta, z) dzeta,
///   g_k(zeta, z) = exp(-i k (zeta - z)) / (pi (zeta - z)).
/// The Cauchy part 1/(pi (zeta - z)) acts as the exact Fourier multiplier
/// (+i for modes n >= 0, -i for n < 0); the smooth remainder uses the
/// trapezoidal rule. The conjugate variant is f -> conj(S_k conj f), the
/// kernel conj(g_k) integrated against conj(dzeta).
Eigen::MatrixXcd single_layer_matrix(const BoundaryGeometry& geom, cplx k, LayerVariant variant);
BoundaryFunction single_layer(const BoundaryGeometry& geom, cplx k, LayerVariant variant, const BoundaryFunction& f);

/// Multiplier of the boundary Cauchy singular operator (1/pi) p.v. int f/(zeta - z) dzeta.
inline cplx cauchy_multiplier(int mode) { return mode >= 0 ? I : -I; }

/// Diagonal blocks of the trace operator:
///   first  = (I - i S_k) / 2                 acts on the analytic component h1,
///   second = (I + i conj(S_k)) / 2           acts on the anti-analytic component h2.
struct KOperator {
  Eigen::MatrixXcd first;
  Eigen::MatrixXcd second;
};
KOperator assemble_K(const BoundaryGeometry& geom, cplx k);

struct RelationResidual {
  BoundaryFunction values;  // i Lambda d_s^{-1}(nu h1 - conj(nu) h2) - (nu h1 + conj(nu) h2)
  cplx compatibility{0.0};  // mean of nu h1 - conj(nu) h2, which must vanish for Cauchy data
  bool mean_warning = false;
};

RelationResidual boundary_relation_residual(const DtNMap& map, const BoundaryGeometry& geom,
                                            const BoundaryFunction& h1, const BoundaryFunction& h2);

struct RegularizationConfig {
  double svd_cutoff = 1e-10;   // relative singular value cutoff
  double k_max = 6.0;
  double residual_tol = 1e-2;  // relative least-squares residual accepted
};

/// Boundary traces (psi11, psi21) of the first CGO column at spectral parameter k.
struct CGOTrace {
  cplx k{0.0};
  BoundaryFunction psi11;
  BoundaryFunction psi21;
  double k_residual = 0.0;         // relative residual of the two K rows
  double relation_residual = 0.0;  // relative residual of the boundary relation rows
  double lsq_residual = 0.0;       // relative residual of the stacked system
  double smallest_singular = 0.0;  // smallest retained singular value
  double condition = 0.0;          // ratio of extreme retained singular values
  int rank = 0;
};

/// Second CGO column (psi12, psi22), solved independently; test oracle for
/// the symmetry psi12(z, k) = conj(psi21(z, conj k)).
struct SecondColumnTrace {
  cplx k{0.0};
  BoundaryFunction psi12;
  BoundaryFunction psi22;
  double lsq_residual = 0.0;
};

/// Stacked least-squares solver for the trace system. Holds the k-independent
/// parts; `solve` is const and may be called concurrently.
class TraceSolver {
 public:
  TraceSolver(const DtNMap& map, const BoundaryGeometry& geom, RegularizationConfig reg = {});

  CGOTrace solve(cplx k) const;
  SecondColumnTrace solve_second_column(cplx k) const;

  const BoundaryGeometry& geometry() const { return geom_; }
  const RegularizationConfig& regularization() const { return reg_; }

 private:
  struct Solution {
    Eigen::VectorXcd x;
    double lsq_residual, smallest, condition;
    int rank;
  };
  Solution solve_stacked(const Eigen::MatrixXcd& first, const Eigen::MatrixXcd& second, const Eigen::VectorXcd& rhs1,
                         const Eigen::VectorXcd& rhs2) const;
  void check_k(cplx k) const;

  BoundaryGeometry geom_;
  RegularizationConfig reg_;
  Eigen::MatrixXcd relation1_, relation2_;  // boundary relation blocks acting on h1, h2
  Eigen::RowVectorXcd mean1_, mean2_;       // compatibility row
  Eigen::MatrixXcd cauchy_;
};

CGOTrace solve_cgo_trace(const DtNMap& map, const BoundaryGeometry& geom, cplx k, const RegularizationConfig& reg = {});

/// psi12(., k) = conj(psi21(., conj k)), from the trace solved at conj k.
BoundaryFunction second_column_trace(const CGOTrace& trace_at_conj_k);

/// Exterior continuation of a trace, |z| > radius:
///   v(z) = exp(ikz) (1 - C[h1 exp(-ik.)](z)),  w(z) = conj(-exp(ikz) C[conj(h2) exp(-ik.)](z)),
/// with C the Cauchy integral (1/2 pi i) int f(zeta) / (zeta - z) dzeta.
/// Both tend to (h1, h2) on the boundary.
std::pair<cplx, cplx> exterior_extension(const BoundaryGeometry& geom, const CGOTrace& trace, cplx z);

nlohmann::json to_json(const CGOTrace& t);
CGOTrace trace_from_json(const nlohmann::json& j);

}  // namespace calderon
