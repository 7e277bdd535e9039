#pragma once

#include <functional>

#include "calderon/types.hpp"

namespace calderon {

/// Samples of a complex function at the boundary nodes.
using BoundaryFunction = Eigen::VectorXcd;

/// Discretized circle |z| = radius with equispaced nodes, counterclockwise.
struct BoundaryGeometry {
  int n_nodes = 0;
  double radius = 1.0;
  Eigen::VectorXcd nodes;    // z_j = radius * exp(2 pi i j / n_nodes)
  Eigen::VectorXcd normals;  // nu_j = z_j / radius
  Eigen::VectorXd weights;   // arclength weights, all equal to 2 pi radius / n_nodes

  double length() const { return 2.0 * pi * radius; }
  double angle(int j) const { return 2.0 * pi * j / n_nodes; }
};

BoundaryGeometry make_disk_geometry(int n_nodes, double radius = 1.0);

BoundaryFunction sample(const BoundaryGeometry& geom, const std::function<cplx(cplx)>& f);

/// Signed Fourier mode carried by FFT slot `slot` of an n-point transform.
/// The Nyquist slot n/2 is reported as -n/2.
inline int mode_of_slot(int slot, int n) { return slot < n / 2 ? slot : slot - n; }
inline int slot_of_mode(int mode, int n) { return ((mode % n) + n) % n; }

/// Coefficients c_n with f(theta_j) = sum_n c_n exp(i n theta_j), in FFT slot order.
Eigen::VectorXcd fourier_coefficients(const BoundaryFunction& f);
BoundaryFunction from_fourier_coefficients(const Eigen::VectorXcd& c);

/// Applies the Fourier multiplier `symbol(mode)` to f. The Nyquist mode is zeroed.
BoundaryFunction apply_multiplier(const BoundaryFunction& f, const std::function<cplx(int)>& symbol);

/// Dense matrix of the same multiplier acting on point values.
Eigen::MatrixXcd multiplier_matrix(int n_nodes, const std::function<cplx(int)>& symbol);

/// d/ds: multiplier i n / radius.
BoundaryFunction tangential_derivative(const BoundaryGeometry& geom, const BoundaryFunction& f);

struct Antiderivative {
  BoundaryFunction values;
  cplx removed_mean{0.0};     // mean of the input, projected out before integrating
  bool mean_warning = false;  // |removed_mean| exceeded the tolerance
};

/// Zero-mean antiderivative along arclength: mode n != 0 divided by i n / radius,
/// mode 0 set to zero.
Antiderivative tangential_antiderivative(const BoundaryGeometry& geom, const BoundaryFunction& f,
                                         double mean_tol = 1e-10);

/// Arclength-weighted mean of f.
cplx boundary_mean(const BoundaryGeometry& geom, const BoundaryFunction& f);

/// Relative discrete L2 norm helper: sqrt(sum w |f|^2).
double boundary_l2(const BoundaryGeometry& geom, const BoundaryFunction& f);

}  // namespace calderon
