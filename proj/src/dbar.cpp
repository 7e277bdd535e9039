#include "calderon/dbar.hpp"

#include "calderon/error.hpp"

namespace calderon {

CauchyTransformK::CauchyTransformK(const KGrid& grid) : grid_(grid), fft_(2 * grid.side(), 2 * grid.side()) {
  const int p = 2 * grid.side();
  const double h = grid.h_k;
  kernel_hat_.resize(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      const cplx d = h * cplx(mode_of_slot(a, p), mode_of_slot(b, p));
      kernel_hat_(a, b) = (a == 0 && b == 0) ? cplx{0.0} : h * h / (pi * d);
    }
  fft_.forward_inplace(kernel_hat_);
  kernel_hat_ /= static_cast<double>(p) * p;
}

Eigen::MatrixXcd CauchyTransformK::apply(const Eigen::MatrixXcd& f) const {
  const int s = grid_.side();
  if (f.rows() != s || f.cols() != s) throw parameter_error("field does not match the k-grid");
  Eigen::MatrixXcd pad = Eigen::MatrixXcd::Zero(2 * s, 2 * s);
  pad.topLeftCorner(s, s) = f;
  fft_.forward_inplace(pad);
  pad = pad.cwiseProduct(kernel_hat_);
  fft_.inverse_inplace(pad);
  return pad.topLeftCorner(s, s);
}

KGridField cauchy_transform_k(const KGridField& field) {
  return {field.grid, CauchyTransformK(field.grid).apply(field.values)};
}

nlohmann::json to_json(const SolverConfig& c) {
  return {{"tol", c.tol}, {"max_iter", c.max_iter}, {"restart", c.restart}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  try {
    c.tol = j.value("tol", c.tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.restart = j.value("restart", c.restart);
  } catch (const nlohmann::json::exception& e) {
    throw parameter_error(std::string("malformed solver config: ") + e.what());
  }
  if (!(c.tol > 0.0) || c.max_iter < 1 || c.restart < 1) throw parameter_error("solver config out of range");
  return c;
}

DbarSolver::DbarSolver(const ScatteringGrid& dual) : cauchy_(dual.grid), s21_(dual.s21) {
  const int s = dual.grid.side();
  if (s21_.rows() != s || s21_.cols() != s) throw parameter_error("scattering arrays do not match the k-grid");
}

KGridField DbarSolver::solve(cplx z, const SolverConfig& config, DbarReport* report) const {
  const KGrid& g = grid();
  const int s = g.side();
  const Eigen::Index n = static_cast<Eigen::Index>(s) * s;
  Eigen::MatrixXcd a(s, s);
  for (int ix = 0; ix < s; ++ix)
    for (int iy = 0; iy < s; ++iy) a(ix, iy) = s21_(ix, iy) == cplx{0.0} ? cplx{0.0} : twist(z, -g.node(ix, iy)) * s21_(ix, iy);

  auto pack = [n](const Eigen::MatrixXcd& u) {
    Eigen::VectorXd v(2 * n);
    v.head(n) = Eigen::Map<const Eigen::VectorXcd>(u.data(), n).real();
    v.tail(n) = Eigen::Map<const Eigen::VectorXcd>(u.data(), n).imag();
    return v;
  };
  auto unpack = [n, s](const Eigen::VectorXd& v) {
    Eigen::MatrixXcd u(s, s);
    Eigen::Map<Eigen::VectorXcd> flat(u.data(), n);
    flat.real() = v.head(n);
    flat.imag() = v.tail(n);
    return u;
  };
  auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    const Eigen::MatrixXcd u = unpack(v);
    return pack(u - cauchy_.apply(a.cwiseProduct(u.conjugate())));
  };

  const Eigen::VectorXd rhs = pack(cauchy_.apply(a));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n);
  const GmresReport rep = gmres<double>(op, rhs, x, GmresOptions{config.tol, config.max_iter, config.restart});
  if (report) report->gmres = rep;
  if (!rep.converged) {
    std::string hist;
    const std::size_t from = rep.history.size() > 5 ? rep.history.size() - 5 : 0;
    for (std::size_t i = from; i < rep.history.size(); ++i) hist += " " + std::to_string(rep.history[i]);
    throw numerical_error("dbar solve did not converge after " + std::to_string(rep.iterations) +
                          " iterations; last residuals:" + hist);
  }
  KGridField out{g, unpack(x)};
  out.values.array() += 1.0;
  return out;
}

cplx evaluate_at_zero(const KGridField& field) {
  const int s = field.grid.side();
  if (field.values.rows() != s || field.values.cols() != s) throw parameter_error("field does not match the k-grid");
  const int o = field.grid.origin();
  if (std::abs(field.grid.node(o, o)) != 0.0) throw parameter_error("grid has no node at k = 0");
  return field.values(o, o);
}

}  // namespace calderon
