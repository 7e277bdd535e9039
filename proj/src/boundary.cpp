#include "calderon/boundary.hpp"

#include <bit>

#include "calderon/error.hpp"
#include "calderon/fft.hpp"

namespace calderon {

BoundaryGeometry make_disk_geometry(int n_nodes, double radius) {
  if (n_nodes < 8 || !std::has_single_bit(static_cast<unsigned>(n_nodes)))
    throw parameter_error("make_disk_geometry: n_nodes must be a power of two >= 8, got " +
                          std::to_string(n_nodes));
  if (!(radius > 0.0)) throw parameter_error("make_disk_geometry: radius must be positive");

  BoundaryGeometry g;
  g.n_nodes = n_nodes;
  g.radius = radius;
  g.nodes.resize(n_nodes);
  g.normals.resize(n_nodes);
  g.weights = Eigen::VectorXd::Constant(n_nodes, 2.0 * pi * radius / n_nodes);
  for (int j = 0; j < n_nodes; ++j) {
    const cplx e = std::polar(1.0, g.angle(j));
    g.normals(j) = e;
    g.nodes(j) = radius * e;
  }
  return g;
}

BoundaryFunction sample(const BoundaryGeometry& geom, const std::function<cplx(cplx)>& f) {
  BoundaryFunction out(geom.n_nodes);
  for (int j = 0; j < geom.n_nodes; ++j) out(j) = f(geom.nodes(j));
  return out;
}

Eigen::VectorXcd fourier_coefficients(const BoundaryFunction& f) {
  const Fft1d fft(static_cast<int>(f.size()));
  return fft.forward(f) / static_cast<double>(f.size());
}

BoundaryFunction from_fourier_coefficients(const Eigen::VectorXcd& c) {
  const Fft1d fft(static_cast<int>(c.size()));
  return fft.inverse(c);
}

BoundaryFunction apply_multiplier(const BoundaryFunction& f, const std::function<cplx(int)>& symbol) {
  const int n = static_cast<int>(f.size());
  const Fft1d fft(n);
  Eigen::VectorXcd c = fft.forward(f) / static_cast<double>(n);
  for (int s = 0; s < n; ++s) c(s) *= (s == n / 2) ? cplx(0.0) : symbol(mode_of_slot(s, n));
  return fft.inverse(c);
}

Eigen::MatrixXcd multiplier_matrix(int n_nodes, const std::function<cplx(int)>& symbol) {
  // M = F^{-1} diag(symbol) F, written out entrywise: a circulant matrix.
  Eigen::VectorXcd first_column(n_nodes);
  Eigen::VectorXcd sym(n_nodes);
  for (int s = 0; s < n_nodes; ++s) sym(s) = (s == n_nodes / 2) ? cplx(0.0) : symbol(mode_of_slot(s, n_nodes));
  const Fft1d fft(n_nodes);
  first_column = fft.inverse(sym) / static_cast<double>(n_nodes);
  Eigen::MatrixXcd m(n_nodes, n_nodes);
  for (int c = 0; c < n_nodes; ++c)
    for (int r = 0; r < n_nodes; ++r) m(r, c) = first_column((r - c + n_nodes) % n_nodes);
  return m;
}

BoundaryFunction tangential_derivative(const BoundaryGeometry& geom, const BoundaryFunction& f) {
  if (f.size() != geom.n_nodes) throw parameter_error("tangential_derivative: shape mismatch");
  const double r = geom.radius;
  return apply_multiplier(f, [r](int n) { return I * static_cast<double>(n) / r; });
}

Antiderivative tangential_antiderivative(const BoundaryGeometry& geom, const BoundaryFunction& f,
                                         double mean_tol) {
  if (f.size() != geom.n_nodes) throw parameter_error("tangential_antiderivative: shape mismatch");
  Antiderivative out;
  out.removed_mean = f.mean();
  out.mean_warning = std::abs(out.removed_mean) > mean_tol;
  const double r = geom.radius;
  out.values = apply_multiplier(f, [r](int n) {
    return n == 0 ? cplx(0.0) : r / (I * static_cast<double>(n));
  });
  return out;
}

cplx boundary_mean(const BoundaryGeometry& geom, const BoundaryFunction& f) {
  return (geom.weights.cast<cplx>().array() * f.array()).sum() / geom.length();
}

double boundary_l2(const BoundaryGeometry& geom, const BoundaryFunction& f) {
  return std::sqrt((geom.weights.array() * f.array().abs2()).sum());
}

}  // namespace calderon
