#include "calderon/dtn.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "calderon/error.hpp"
#include "calderon/mesh.hpp"

namespace calderon {

namespace {

void check_max_mode(const BoundaryGeometry& geom, int max_mode) {
  if (max_mode < 0 || max_mode > geom.n_nodes / 2 - 1)
    throw parameter_error("max_mode must lie in [0, n_nodes/2 - 1] = [0, " + std::to_string(geom.n_nodes / 2 - 1) +
                          "], got " + std::to_string(max_mode));
}

// Schur complement of a symmetric stiffness matrix onto a set of boundary
// vertices: g -> A_BB g + A_BI u_I with A_II u_I = -A_IB g.
class BoundarySchur {
 public:
  BoundarySchur(const Eigen::SparseMatrix<double>& a, const std::vector<int>& boundary) {
    const int n = static_cast<int>(a.rows());
    local_.assign(n, -1);
    is_boundary_.assign(n, false);
    for (int b : boundary) is_boundary_[b] = true;
    int ni = 0, nb = 0;
    for (int v = 0; v < n; ++v) local_[v] = is_boundary_[v] ? nb++ : ni++;
    // boundary order follows `boundary`, not vertex order
    for (int k = 0; k < static_cast<int>(boundary.size()); ++k) local_[boundary[k]] = k;

    std::vector<Eigen::Triplet<double>> tii, tib, tbi, tbb;
    for (int c = 0; c < a.outerSize(); ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it) {
        const int r = static_cast<int>(it.row());
        const int col = static_cast<int>(it.col());
        const bool rb = is_boundary_[r], cb = is_boundary_[col];
        auto& dst = rb ? (cb ? tbb : tbi) : (cb ? tib : tii);
        dst.emplace_back(local_[r], local_[col], it.value());
      }
    }
    a_ii_.resize(ni, ni);
    a_ib_.resize(ni, nb);
    a_bi_.resize(nb, ni);
    a_bb_.resize(nb, nb);
    a_ii_.setFromTriplets(tii.begin(), tii.end());
    a_ib_.setFromTriplets(tib.begin(), tib.end());
    a_bi_.setFromTriplets(tbi.begin(), tbi.end());
    a_bb_.setFromTriplets(tbb.begin(), tbb.end());

    const auto t0 = std::chrono::steady_clock::now();
    solver_.compute(a_ii_);
    if (solver_.info() != Eigen::Success)
      throw numerical_error("FEM stiffness factorization failed (" + std::to_string(ni) +
                            " interior unknowns); matrix singular or indefinite");
    seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& g) const {
    const Eigen::VectorXd rhs = -(a_ib_ * g);
    const Eigen::VectorXd ui = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success) throw numerical_error("FEM interior solve failed");
    return a_bb_ * g + a_bi_ * ui;
  }

  double factorization_seconds() const { return seconds_; }

 private:
  std::vector<int> local_;
  std::vector<bool> is_boundary_;
  Eigen::SparseMatrix<double> a_ii_, a_ib_, a_bi_, a_bb_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  double seconds_ = 0.0;
};

// Fourier-basis matrix (1/length) g_m^H S g_n for |m|, |n| <= max_mode, where
// g_n samples exp(i n theta) at the boundary vertices.
Eigen::MatrixXcd energy_matrix(const BoundarySchur& schur, const std::vector<cplx>& boundary_points, int max_mode,
                               double length) {
  const int nb = static_cast<int>(boundary_points.size());
  const int dim = 2 * max_mode + 1;
  Eigen::MatrixXcd g(nb, dim), sg(nb, dim);
  for (int n = 0; n <= max_mode; ++n) {
    Eigen::VectorXd c(nb), s(nb);
    for (int b = 0; b < nb; ++b) {
      const double th = std::arg(boundary_points[b]);
      c(b) = std::cos(n * th);
      s(b) = std::sin(n * th);
    }
    const Eigen::VectorXd sc = schur.apply(c);
    const Eigen::VectorXd ss = n == 0 ? Eigen::VectorXd::Zero(nb) : schur.apply(s);
    for (int b = 0; b < nb; ++b) {
      g(b, max_mode + n) = cplx(c(b), s(b));
      g(b, max_mode - n) = cplx(c(b), -s(b));
      sg(b, max_mode + n) = cplx(sc(b), ss(b));
      sg(b, max_mode - n) = cplx(sc(b), -ss(b));
    }
  }
  return g.adjoint() * sg / length;
}

std::vector<cplx> points_of(const TriMesh& mesh, const std::vector<int>& ids) {
  std::vector<cplx> p;
  p.reserve(ids.size());
  for (int v : ids) p.push_back(mesh.vertices[v]);
  return p;
}

Eigen::MatrixXcd fem_energy_matrix(const ConductivityField& gamma, double radius, int rings, int max_mode,
                                   FemReport* report) {
  const TriMesh mesh = make_disk_mesh(radius, rings);
  const auto a = assemble_stiffness(mesh, [&](cplx z) { return gamma(z); });
  const BoundarySchur schur(a, mesh.outer_boundary);
  if (report) {
    report->n_vertices = mesh.n_vertices();
    report->n_boundary_vertices = static_cast<int>(mesh.outer_boundary.size());
    report->factorization_seconds += schur.factorization_seconds();
  }
  return energy_matrix(schur, points_of(mesh, mesh.outer_boundary), max_mode, 2.0 * pi * radius);
}

}  // namespace

DtNMap dtn_unit(const BoundaryGeometry& geom, int max_mode) {
  check_max_mode(geom, max_mode);
  DtNMap map;
  map.max_mode = max_mode;
  map.geometry = geom;
  map.matrix = Eigen::MatrixXcd::Zero(2 * max_mode + 1, 2 * max_mode + 1);
  for (int n = -max_mode; n <= max_mode; ++n) map.matrix(map.index(n), map.index(n)) = std::abs(n) / geom.radius;
  return map;
}

DtNMap dtn_fem(const ConductivityField& gamma, const BoundaryGeometry& geom, int max_mode, const FemOptions& options,
               FemReport* report) {
  check_max_mode(geom, max_mode);
  if (options.mesh_resolution < 4) throw parameter_error("dtn_fem: mesh_resolution must be >= 4");
  if (6 * options.mesh_resolution < 4 * max_mode)
    throw parameter_error("dtn_fem: mesh too coarse to carry the requested Fourier modes");
  gamma.validate(geom.radius);

  if (report) *report = {};
  DtNMap map;
  map.max_mode = max_mode;
  map.geometry = geom;
  map.matrix = fem_energy_matrix(gamma, geom.radius, options.mesh_resolution, max_mode, report);
  if (options.reference_correction) {
    const Eigen::MatrixXcd ref =
        fem_energy_matrix(ConductivityField::unit(), geom.radius, options.mesh_resolution, max_mode, nullptr);
    map.matrix += dtn_unit(geom, max_mode).matrix - ref;
  }
  if (!map.matrix.allFinite()) throw numerical_error("dtn_fem: non-finite entries in the assembled map");
  return map;
}

BoundaryFunction apply_dtn(const DtNMap& map, const BoundaryFunction& f, ApplyReport* report) {
  const int n = map.geometry.n_nodes;
  if (f.size() != n) throw parameter_error("apply_dtn: shape mismatch");
  const Eigen::VectorXcd c = fourier_coefficients(f);
  const int big_m = map.max_mode;
  Eigen::VectorXcd modes(2 * big_m + 1);
  double dropped = 0.0;
  for (int s = 0; s < n; ++s) {
    const int mode = mode_of_slot(s, n);
    if (std::abs(mode) <= big_m)
      modes(map.index(mode)) = c(s);
    else
      dropped += std::norm(c(s));
  }
  if (report) report->truncated_norm = std::sqrt(dropped);
  const Eigen::VectorXcd out_modes = map.matrix * modes;
  Eigen::VectorXcd out_c = Eigen::VectorXcd::Zero(n);
  for (int mode = -big_m; mode <= big_m; ++mode) out_c(slot_of_mode(mode, n)) = out_modes(map.index(mode));
  return from_fourier_coefficients(out_c);
}

Eigen::MatrixXcd dtn_point_matrix(const DtNMap& map) {
  const int n = map.geometry.n_nodes;
  const int big_m = map.max_mode;
  // Lambda = F^{-1} L_ext F with F the normalized DFT.
  Eigen::MatrixXcd lext = Eigen::MatrixXcd::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    const int ms = mode_of_slot(s, n);
    if (s == n / 2) continue;
    if (std::abs(ms) > big_m) {
      lext(s, s) = std::abs(ms) / map.radius();
      continue;
    }
    for (int t = 0; t < n; ++t) {
      const int mt = mode_of_slot(t, n);
      if (t == n / 2 || std::abs(mt) > big_m) continue;
      lext(s, t) = map(ms, mt);
    }
  }
  Eigen::MatrixXcd f(n, n);
  for (int s = 0; s < n; ++s)
    for (int j = 0; j < n; ++j) f(s, j) = std::polar(1.0 / n, -2.0 * pi * mode_of_slot(s, n) * j / n);
  Eigen::MatrixXcd finv(n, n);
  for (int j = 0; j < n; ++j)
    for (int s = 0; s < n; ++s) finv(j, s) = std::polar(1.0, 2.0 * pi * mode_of_slot(s, n) * j / n);
  return finv * lext * f;
}

namespace {

// Per-mode annulus coefficients for gamma' == 1 between r1 and rho:
// inner flux = alpha c + beta f, outer flux = delta c + eps f, where c and f
// are the mode's Dirichlet coefficients on the inner and outer circle.
struct AnnulusMode {
  double alpha, beta, delta, eps;
};

AnnulusMode annulus_mode(int n, double r1, double rho) {
  if (n == 0) {
    const double l = std::log(rho / r1);
    return {-1.0 / (r1 * l), 1.0 / (r1 * l), -1.0 / (rho * l), 1.0 / (rho * l)};
  }
  const double t = std::abs(n);
  Eigen::Matrix2d m;
  m << std::pow(r1, t), std::pow(r1, -t), std::pow(rho, t), std::pow(rho, -t);
  const Eigen::Matrix2d minv = m.inverse();
  auto flux_row = [t](double r) { return Eigen::RowVector2d(t * std::pow(r, t - 1), -t * std::pow(r, -t - 1)); };
  const Eigen::RowVector2d inner = flux_row(r1) * minv;
  const Eigen::RowVector2d outer = flux_row(rho) * minv;
  return {inner(0), inner(1), outer(0), outer(1)};
}

DtNMap extend_analytic(const DtNMap& inner, const BoundaryGeometry& outer_geom, ExtensionReport* report) {
  const int big_m = inner.max_mode;
  const int dim = 2 * big_m + 1;
  const double r1 = inner.radius();
  const double rho = outer_geom.radius;

  Eigen::VectorXd alpha(dim), beta(dim), delta(dim), eps(dim);
  for (int n = -big_m; n <= big_m; ++n) {
    const AnnulusMode am = annulus_mode(n, r1, rho);
    alpha(n + big_m) = am.alpha;
    beta(n + big_m) = am.beta;
    delta(n + big_m) = am.delta;
    eps(n + big_m) = am.eps;
  }
  // Coupling: alpha c + beta f = Lambda_in c  =>  c = (Lambda_in - alpha)^{-1} beta f.
  Eigen::MatrixXcd coupling = inner.matrix;
  coupling.diagonal() -= alpha.cast<cplx>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(coupling);
  const auto sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (report) report->coupling_condition = cond;
  if (!(cond < 1e12)) throw numerical_error("extend_dtn: coupling system near-singular, condition number " + std::to_string(cond));

  const Eigen::MatrixXcd c_of_f = coupling.partialPivLu().solve(Eigen::MatrixXcd(beta.cast<cplx>().asDiagonal()));
  DtNMap out;
  out.max_mode = big_m;
  out.geometry = outer_geom;
  out.matrix = delta.cast<cplx>().asDiagonal() * c_of_f;
  out.matrix.diagonal() += eps.cast<cplx>();
  return out;
}

DtNMap extend_fem(const DtNMap& inner, const ConductivityField& gamma_annulus, const BoundaryGeometry& outer_geom,
                  const ExtensionOptions& options) {
  const double r1 = inner.radius();
  const double rho = outer_geom.radius;
  const int na = options.n_angular;
  if (na < 4 * inner.max_mode + 4) throw parameter_error("extend_dtn: n_angular too small for the map's modes");
  int nr = options.n_radial;
  if (nr <= 0) nr = std::max(4, static_cast<int>(std::ceil((rho - r1) / (2.0 * pi * r1 / na))));

  const TriMesh mesh = make_annulus_mesh(r1, rho, na, nr);
  Eigen::SparseMatrix<double> a = assemble_stiffness(mesh, [&](cplx z) { return gamma_annulus(z); });

  // Inner coupling  int_{|z|=r1} (Lambda_in u) v ds  with lumped boundary mass,
  // Lambda_in applied through the DFT of the inner-circle nodal values.
  DtNMap inner_on_ring = inner;
  inner_on_ring.geometry = make_disk_geometry(na, r1);
  const Eigen::MatrixXcd lam = dtn_point_matrix(inner_on_ring);
  const double w = 2.0 * pi * r1 / na;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(na) * na);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j)
      trip.emplace_back(mesh.inner_boundary[i], mesh.inner_boundary[j], 0.5 * w * (lam(i, j).real() + lam(j, i).real()));
  Eigen::SparseMatrix<double> b(a.rows(), a.cols());
  b.setFromTriplets(trip.begin(), trip.end());
  a += b;

  const BoundarySchur schur(a, mesh.outer_boundary);
  DtNMap out;
  out.max_mode = inner.max_mode;
  out.geometry = outer_geom;
  out.matrix = energy_matrix(schur, points_of(mesh, mesh.outer_boundary), inner.max_mode, 2.0 * pi * rho);
  return out;
}

}  // namespace

DtNMap extend_dtn(const DtNMap& inner, const ConductivityField& gamma_annulus, const BoundaryGeometry& outer_geom,
                  const ExtensionOptions& options, ExtensionReport* report) {
  if (!(outer_geom.radius > inner.radius()))
    throw parameter_error("extend_dtn: outer radius must exceed the inner radius");
  check_max_mode(outer_geom, inner.max_mode);
  if (inner.matrix.rows() != 2 * inner.max_mode + 1) throw parameter_error("extend_dtn: malformed inner map");

  ExtensionMethod method = options.method;
  if (method == ExtensionMethod::automatic)
    method = gamma_annulus.is_unit() ? ExtensionMethod::analytic : ExtensionMethod::fem;
  if (method == ExtensionMethod::analytic && !gamma_annulus.is_unit())
    throw parameter_error("extend_dtn: the analytic path needs gamma' == 1 on the annulus");

  ExtensionReport local;
  local.method_used = method;
  DtNMap out = method == ExtensionMethod::analytic ? extend_analytic(inner, outer_geom, &local)
                                                   : extend_fem(inner, gamma_annulus, outer_geom, options);
  if (report) *report = local;
  if (!out.matrix.allFinite()) throw numerical_error("extend_dtn: non-finite entries");
  return out;
}

DtNInvariants check_invariants(const DtNMap& map) {
  DtNInvariants inv;
  const int big_m = map.max_mode;
  const auto& l = map.matrix;
  inv.mode0_column = l.col(map.index(0)).norm();
  inv.mode0_row = l.row(map.index(0)).norm();
  inv.symmetry_defect = (l - l.adjoint()).cwiseAbs().maxCoeff();
  for (int m = -big_m; m <= big_m; ++m)
    for (int n = -big_m; n <= big_m; ++n)
      inv.reality_defect = std::max(inv.reality_defect, std::abs(map(-m, -n) - std::conj(map(m, n))));
  if (big_m > 0) {
    // drop mode 0
    const int dim = 2 * big_m;
    Eigen::MatrixXcd h(dim, dim);
    auto idx = [big_m](int mode) { return mode < 0 ? mode + big_m : mode + big_m - 1; };
    for (int m = -big_m; m <= big_m; ++m)
      for (int n = -big_m; n <= big_m; ++n)
        if (m != 0 && n != 0) h(idx(m), idx(n)) = 0.5 * (map(m, n) + std::conj(map(n, m)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    inv.min_eigenvalue = es.eigenvalues().minCoeff();
  }
  return inv;
}

nlohmann::json to_json(const DtNMap& map) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < map.matrix.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < map.matrix.cols(); ++c) row.push_back({map.matrix(r, c).real(), map.matrix(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return {{"max_mode", map.max_mode}, {"radius", map.radius()}, {"n_nodes", map.geometry.n_nodes}, {"matrix", rows}};
}

DtNMap dtn_from_json(const nlohmann::json& j, int n_nodes) {
  try {
    const int big_m = j.at("max_mode").get<int>();
    const double radius = j.at("radius").get<double>();
    if (n_nodes <= 0) n_nodes = j.value("n_nodes", 0);
    if (n_nodes <= 0) throw parameter_error("DtN file carries no n_nodes and none was supplied");
    DtNMap map;
    map.max_mode = big_m;
    map.geometry = make_disk_geometry(n_nodes, radius);
    check_max_mode(map.geometry, big_m);
    const auto& rows = j.at("matrix");
    const int dim = 2 * big_m + 1;
    if (!rows.is_array() || static_cast<int>(rows.size()) != dim) throw io_error("DtN matrix has wrong row count");
    map.matrix.resize(dim, dim);
    for (int r = 0; r < dim; ++r) {
      if (static_cast<int>(rows[r].size()) != dim) throw io_error("DtN matrix has wrong column count");
      for (int c = 0; c < dim; ++c) map.matrix(r, c) = {rows[r][c].at(0).get<double>(), rows[r][c].at(1).get<double>()};
    }
    return map;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("malformed DtN JSON: ") + e.what());
  }
}

}  // namespace calderon
