#include "calderon/cgo.hpp"

#include "calderon/error.hpp"
#include "json_util.hpp"
#include "lapack.hpp"

namespace calderon {

namespace {

void check_shape(const BoundaryGeometry& geom, const BoundaryFunction& f, const char* what) {
  if (f.size() != geom.n_nodes)
    throw parameter_error(std::string(what) + " has " + std::to_string(f.size()) + " samples, geometry has " +
                          std::to_string(geom.n_nodes));
}

Eigen::MatrixXcd cauchy_matrix(int n) { return multiplier_matrix(n, cauchy_multiplier); }

Eigen::MatrixXcd layer_with_cauchy(const BoundaryGeometry& geom, cplx k, const Eigen::MatrixXcd& cauchy) {
  const int n = geom.n_nodes;
  const double dtheta = 2.0 * pi / n;
  Eigen::MatrixXcd s = cauchy;
  if (k == cplx{0.0}) return s;
  for (int l = 0; l < n; ++l) {
    const cplx zeta = geom.nodes(l);
    const cplx dzeta = I * zeta * dtheta;
    for (int j = 0; j < n; ++j) {
      if (j == l) {
        s(j, j) += (-I * k) * dzeta / pi;
        continue;
      }
      const cplx d = zeta - geom.nodes(j);
      s(j, l) += (std::exp(-I * k * d) - 1.0) / d * dzeta / pi;
    }
  }
  return s;
}

}  // namespace

Eigen::MatrixXcd single_layer_matrix(const BoundaryGeometry& geom, cplx k, LayerVariant variant) {
  Eigen::MatrixXcd s = layer_with_cauchy(geom, k, cauchy_matrix(geom.n_nodes));
  if (variant == LayerVariant::conjugate) s = s.conjugate().eval();
  return s;
}

BoundaryFunction single_layer(const BoundaryGeometry& geom, cplx k, LayerVariant variant, const BoundaryFunction& f) {
  check_shape(geom, f, "single_layer input");
  return single_layer_matrix(geom, k, variant) * f;
}

KOperator assemble_K(const BoundaryGeometry& geom, cplx k) {
  const Eigen::MatrixXcd s = single_layer_matrix(geom, k, LayerVariant::plain);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(geom.n_nodes, geom.n_nodes);
  return {0.5 * (id - I * s), 0.5 * (id + I * s.conjugate())};
}

RelationResidual boundary_relation_residual(const DtNMap& map, const BoundaryGeometry& geom,
                                            const BoundaryFunction& h1, const BoundaryFunction& h2) {
  check_shape(geom, h1, "h1");
  check_shape(geom, h2, "h2");
  if (map.geometry.n_nodes != geom.n_nodes || std::abs(map.radius() - geom.radius) > 1e-12)
    throw parameter_error("DtN map and geometry disagree");
  const BoundaryFunction nh1 = geom.normals.cwiseProduct(h1);
  const BoundaryFunction nh2 = geom.normals.conjugate().cwiseProduct(h2);
  const BoundaryFunction diff = nh1 - nh2;
  const Antiderivative anti = tangential_antiderivative(geom, diff, 1e-8 * std::max(1.0, diff.cwiseAbs().maxCoeff()));
  RelationResidual out;
  out.values = I * (dtn_point_matrix(map) * anti.values) - (nh1 + nh2);
  out.compatibility = anti.removed_mean;
  out.mean_warning = anti.mean_warning;
  return out;
}

TraceSolver::TraceSolver(const DtNMap& map, const BoundaryGeometry& geom, RegularizationConfig reg)
    : geom_(geom), reg_(reg) {
  if (map.geometry.n_nodes != geom.n_nodes || std::abs(map.radius() - geom.radius) > 1e-12)
    throw parameter_error("DtN map and geometry disagree");
  if (!(reg.svd_cutoff > 0.0 && reg.svd_cutoff < 1.0)) throw parameter_error("svd_cutoff must lie in (0, 1)");
  if (!(reg.k_max > 0.0)) throw parameter_error("k_max must be positive");
  if (!(reg.residual_tol > 0.0)) throw parameter_error("residual_tol must be positive");

  const int n = geom.n_nodes;
  const double radius = geom.radius;
  const Eigen::MatrixXcd antideriv =
      multiplier_matrix(n, [radius](int m) { return m == 0 ? cplx{0.0} : radius / (I * static_cast<double>(m)); });
  const Eigen::MatrixXcd t = I * (dtn_point_matrix(map) * antideriv);
  const Eigen::VectorXcd nu = geom.normals;
  const Eigen::VectorXcd nubar = nu.conjugate();
  relation1_ = t * nu.asDiagonal();
  relation1_ -= Eigen::MatrixXcd(nu.asDiagonal());
  relation2_ = -(t * nubar.asDiagonal());
  relation2_ -= Eigen::MatrixXcd(nubar.asDiagonal());
  const Eigen::VectorXcd w = geom.weights.cast<cplx>() / geom.length();
  mean1_ = w.cwiseProduct(nu).transpose();
  mean2_ = -w.cwiseProduct(nubar).transpose();
  cauchy_ = cauchy_matrix(n);
}

void TraceSolver::check_k(cplx k) const {
  if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) throw parameter_error("k is not finite");
  if (std::abs(k) > reg_.k_max)
    throw parameter_error("|k| = " + std::to_string(std::abs(k)) + " exceeds k_max = " + std::to_string(reg_.k_max));
}

TraceSolver::Solution TraceSolver::solve_stacked(const Eigen::MatrixXcd& first, const Eigen::MatrixXcd& second,
                                                 const Eigen::VectorXcd& rhs1, const Eigen::VectorXcd& rhs2) const {
  const int n = geom_.n_nodes;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(3 * n + 1, 2 * n);
  a.block(0, 0, n, n) = first;
  a.block(n, n, n, n) = second;
  a.block(2 * n, 0, n, n) = relation1_;
  a.block(2 * n, n, n, n) = relation2_;
  a.block(3 * n, 0, 1, n) = mean1_;
  a.block(3 * n, n, 1, n) = mean2_;
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(3 * n + 1);
  b.head(n) = rhs1;
  b.segment(n, n) = rhs2;

  detail::TruncatedLstsq ls = detail::truncated_lstsq(a, b, reg_.svd_cutoff);
  if (ls.rank == 0) throw numerical_error("trace system is numerically zero");
  Solution sol;
  sol.x = std::move(ls.x);
  sol.lsq_residual = (a * sol.x - b).norm() / b.norm();
  sol.smallest = ls.singular_values(ls.rank - 1);
  sol.condition = ls.singular_values(0) / sol.smallest;
  sol.rank = ls.rank;
  if (!(sol.lsq_residual <= reg_.residual_tol))
    throw numerical_error("ill-conditioned trace solve: relative residual " + std::to_string(sol.lsq_residual) +
                          ", condition estimate " + std::to_string(sol.condition));
  return sol;
}

CGOTrace TraceSolver::solve(cplx k) const {
  check_k(k);
  const int n = geom_.n_nodes;
  const Eigen::MatrixXcd s = layer_with_cauchy(geom_, k, cauchy_);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd k1 = 0.5 * (id - I * s);
  const Eigen::MatrixXcd k2 = 0.5 * (id + I * s.conjugate());
  Eigen::VectorXcd e(n);
  for (int j = 0; j < n; ++j) e(j) = std::exp(I * geom_.nodes(j) * k);

  const Solution sol = solve_stacked(k1, k2, e, Eigen::VectorXcd::Zero(n));
  CGOTrace t;
  t.k = k;
  t.psi11 = sol.x.head(n);
  t.psi21 = sol.x.tail(n);
  const double hnorm = std::max(sol.x.norm(), 1e-300);
  const double kres = std::sqrt((k1 * t.psi11 - e).squaredNorm() + (k2 * t.psi21).squaredNorm());
  t.k_residual = kres / e.norm();
  const Eigen::VectorXcd rel = relation1_ * t.psi11 + relation2_ * t.psi21;
  const cplx mean = (mean1_ * t.psi11 + mean2_ * t.psi21)(0);
  t.relation_residual = std::sqrt(rel.squaredNorm() + std::norm(mean)) / hnorm;
  t.lsq_residual = sol.lsq_residual;
  t.smallest_singular = sol.smallest;
  t.condition = sol.condition;
  t.rank = sol.rank;
  return t;
}

SecondColumnTrace TraceSolver::solve_second_column(cplx k) const {
  check_k(k);
  const int n = geom_.n_nodes;
  const Eigen::MatrixXcd s = layer_with_cauchy(geom_, std::conj(k), cauchy_);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXcd e(n);
  for (int j = 0; j < n; ++j) e(j) = std::exp(-I * std::conj(geom_.nodes(j)) * k);
  const Solution sol = solve_stacked(0.5 * (id - I * s), 0.5 * (id + I * s.conjugate()), Eigen::VectorXcd::Zero(n), e);
  SecondColumnTrace t;
  t.k = k;
  t.psi12 = sol.x.head(n);
  t.psi22 = sol.x.tail(n);
  t.lsq_residual = sol.lsq_residual;
  return t;
}

CGOTrace solve_cgo_trace(const DtNMap& map, const BoundaryGeometry& geom, cplx k, const RegularizationConfig& reg) {
  return TraceSolver(map, geom, reg).solve(k);
}

BoundaryFunction second_column_trace(const CGOTrace& trace_at_conj_k) { return trace_at_conj_k.psi21.conjugate(); }

namespace {

// Cauchy integral (1/2 pi i) int f / (zeta - z) dzeta at |z| > radius, from
// the Fourier coefficients of f: only negative modes contribute.
cplx exterior_cauchy(const BoundaryGeometry& geom, const BoundaryFunction& f, cplx z) {
  const Eigen::VectorXcd c = fourier_coefficients(f);
  const int n = geom.n_nodes;
  const cplx inv = geom.radius / z;
  cplx power = 1.0, sum = 0.0;
  for (int mode = -1; mode > -n / 2; --mode) {
    power *= inv;
    sum += c(slot_of_mode(mode, n)) * power;
  }
  return -sum;
}

}  // namespace

std::pair<cplx, cplx> exterior_extension(const BoundaryGeometry& geom, const CGOTrace& trace, cplx z) {
  check_shape(geom, trace.psi11, "psi11");
  check_shape(geom, trace.psi21, "psi21");
  if (!(std::abs(z) > geom.radius)) throw parameter_error("exterior_extension needs |z| > radius");
  const int n = geom.n_nodes;
  BoundaryFunction phi1(n), phi2(n);
  for (int j = 0; j < n; ++j) {
    const cplx damp = std::exp(-I * trace.k * geom.nodes(j));
    phi1(j) = trace.psi11(j) * damp;
    phi2(j) = std::conj(trace.psi21(j)) * damp;
  }
  const cplx grow = std::exp(I * trace.k * z);
  const cplx v = grow * (1.0 - exterior_cauchy(geom, phi1, z));
  const cplx w = std::conj(-grow * exterior_cauchy(geom, phi2, z));
  return {v, w};
}

nlohmann::json to_json(const CGOTrace& t) {
  return {{"k", detail::complex_json(t.k)},
          {"psi11", detail::vector_json(t.psi11)},
          {"psi21", detail::vector_json(t.psi21)},
          {"k_residual", t.k_residual},
          {"relation_residual", t.relation_residual},
          {"lsq_residual", t.lsq_residual},
          {"smallest_singular", t.smallest_singular},
          {"condition", t.condition},
          {"rank", t.rank}};
}

CGOTrace trace_from_json(const nlohmann::json& j) {
  try {
    CGOTrace t;
    t.k = detail::complex_from(j.at("k"));
    t.psi11 = detail::vector_from(j.at("psi11"));
    t.psi21 = detail::vector_from(j.at("psi21"));
    if (t.psi11.size() != t.psi21.size()) throw io_error("trace components differ in length");
    t.k_residual = j.value("k_residual", 0.0);
    t.relation_residual = j.value("relation_residual", 0.0);
    t.lsq_residual = j.value("lsq_residual", 0.0);
    t.smallest_singular = j.value("smallest_singular", 0.0);
    t.condition = j.value("condition", 0.0);
    t.rank = j.value("rank", 0);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("malformed trace JSON: ") + e.what());
  }
}

}  // namespace calderon
