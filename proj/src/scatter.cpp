#include "calderon/scatter.hpp"

#include <fstream>

#include "calderon/error.hpp"
#include "calderon/fft.hpp"
#include "calderon/parallel.hpp"
#include "json_util.hpp"

namespace calderon {

KGrid make_k_grid(int m, double R_k, double h_k) {
  if (m < 3 || m > 12) throw parameter_error("k-grid exponent m must lie in [3, 12]");
  if (!(R_k > 0.0) || !std::isfinite(R_k)) throw parameter_error("R_k must be positive");
  KGrid g;
  g.m = m;
  g.R_k = R_k;
  g.h_k = h_k > 0.0 ? h_k : R_k / (g.half() - 2);
  if (!std::isfinite(g.h_k)) throw parameter_error("h_k must be finite");
  // Every active index must have its mirror -index inside [-half, half - 1].
  if (R_k / g.h_k > g.half() - 1 + 1e-9)
    throw parameter_error("R_k / h_k exceeds 2^{m-1} - 1; the truncated disk does not fit the grid symmetrically");
  return g;
}

ScatteringGrid zero_scattering(const KGrid& grid) {
  const int s = grid.side();
  return {grid, Eigen::MatrixXcd::Zero(s, s), Eigen::MatrixXcd::Zero(s, s)};
}

PotentialField q_from_gamma(const ConductivityField& gamma, double grad_step, bool force_differences) {
  PotentialField q;
  q.support_radius = gamma.support_radius();
  if (gamma.is_unit()) {
    q.identically_zero = true;
    q.evaluate = [](cplx) { return cplx{0.0}; };
    return q;
  }
  if (!(grad_step > 0.0)) throw parameter_error("grad_step must be positive");
  const double support = gamma.support_radius();
  if (gamma.has_exact_gradient() && !force_differences) {
    q.evaluate = [gamma, support](cplx z) -> cplx {
      if (std::abs(z) >= support) return 0.0;
      const double g = gamma(z);
      if (!(g > 0.0)) throw domain_error("conductivity is not positive at a sample point");
      return -0.5 * *gamma.dz(z) / g;
    };
  } else {
    q.evaluate = [gamma, support, grad_step](cplx z) -> cplx {
      if (std::abs(z) >= support + grad_step) return 0.0;
      const double g = gamma(z);
      if (!(g > 0.0)) throw domain_error("conductivity is not positive at a sample point");
      const double gx = (gamma(z + grad_step) - gamma(z - grad_step)) / (2.0 * grad_step);
      const double gy = (gamma(z + I * grad_step) - gamma(z - I * grad_step)) / (2.0 * grad_step);
      return -0.25 * cplx(gx, -gy) / g;
    };
  }
  return q;
}

ScatteringValue scattering_from_traces(const CGOTrace& trace_k, const CGOTrace& trace_conj_k,
                                       const BoundaryGeometry& geom, cplx k) {
  const double tol = 1e-10 * (1.0 + std::abs(k));
  if (std::abs(trace_k.k - k) > tol) throw parameter_error("trace does not belong to k");
  if (std::abs(trace_conj_k.k - std::conj(k)) > tol) throw parameter_error("missing trace at conj(k)");
  if (trace_k.psi21.size() != geom.n_nodes || trace_conj_k.psi21.size() != geom.n_nodes)
    throw parameter_error("trace length does not match geometry");
  const BoundaryFunction psi12 = second_column_trace(trace_conj_k);
  cplx a = 0.0, b = 0.0;
  for (int j = 0; j < geom.n_nodes; ++j) {
    const cplx z = geom.nodes(j);
    const cplx nu = geom.normals(j);
    const double w = geom.weights(j);
    a += w * std::exp(-I * z * std::conj(k)) * nu * psi12(j);
    b -= w * std::exp(I * std::conj(z * k)) * std::conj(nu) * trace_k.psi21(j);
  }
  const cplx pref = I / (2.0 * pi);
  return {pref * a, pref * b};
}

const CGOTrace* TraceTable::at(int ix, int iy) const {
  const int s = grid.side();
  if (ix < 0 || iy < 0 || ix >= s || iy >= s) return nullptr;
  const int id = node_of[static_cast<std::size_t>(ix) * s + iy];
  return id < 0 ? nullptr : &traces[id];
}

namespace {

TraceTable empty_table(const KGrid& grid) {
  TraceTable t;
  t.grid = grid;
  const int s = grid.side();
  t.node_of.assign(static_cast<std::size_t>(s) * s, -1);
  int count = 0;
  for (int ix = 0; ix < s; ++ix)
    for (int iy = 0; iy < s; ++iy)
      if (grid.active(ix, iy)) t.node_of[static_cast<std::size_t>(ix) * s + iy] = count++;
  t.traces.resize(count);
  return t;
}

}  // namespace

TraceTable compute_traces(const TraceSolver& solver, const KGrid& grid, int workers) {
  if (grid.R_k > solver.regularization().k_max)
    throw parameter_error("R_k exceeds the trace solver's k_max");
  TraceTable table = empty_table(grid);
  std::vector<cplx> ks(table.traces.size());
  const int s = grid.side();
  for (int ix = 0; ix < s; ++ix)
    for (int iy = 0; iy < s; ++iy) {
      const int id = table.node_of[static_cast<std::size_t>(ix) * s + iy];
      if (id >= 0) ks[id] = grid.node(ix, iy);
    }
  parallel_for(static_cast<int>(ks.size()), workers, [&](int i) { table.traces[i] = solver.solve(ks[i]); });
  return table;
}

ScatteringGrid scattering_from_table(const TraceTable& table, const BoundaryGeometry& geom, int workers) {
  ScatteringGrid out = zero_scattering(table.grid);
  const int s = table.grid.side();
  parallel_for(s, workers, [&](int ix) {
    for (int iy = 0; iy < s; ++iy) {
      const CGOTrace* tk = table.at(ix, iy);
      if (!tk) continue;
      const CGOTrace* tc = table.at(ix, s - iy);
      if (!tc) throw parameter_error("trace table lacks the conjugate node");
      const ScatteringValue v = scattering_from_traces(*tk, *tc, geom, table.grid.node(ix, iy));
      out.s12(ix, iy) = v.s12;
      out.s21(ix, iy) = v.s21;
    }
  });
  return out;
}

namespace {

class PeriodicCell {
 public:
  PeriodicCell(int n, double side, double trunc) : n_(n), h_(side / n), fft_(n, n) {
    if (n < 8 || (n & (n - 1)) != 0) throw parameter_error("oracle resolution must be a power of two >= 8");
    dbar_hat_.resize(n, n);
    d_hat_.resize(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const cplx d = h_ * cplx(mode_of_slot(a, n), mode_of_slot(b, n));
        const bool keep = (a != 0 || b != 0) && std::abs(d) <= trunc;
        dbar_hat_(a, b) = keep ? h_ * h_ / (pi * d) : 0.0;
        d_hat_(a, b) = keep ? h_ * h_ / (pi * std::conj(d)) : 0.0;
      }
    fft_.forward_inplace(dbar_hat_);
    fft_.forward_inplace(d_hat_);
  }

  double h() const { return h_; }
  cplx point(int a, int b) const { return h_ * cplx(a - n_ / 2, b - n_ / 2); }

  // (1/pi) int f(zeta) / (z - zeta) dA
  Eigen::MatrixXcd dbar_inverse(Eigen::MatrixXcd f) const { return convolve(std::move(f), dbar_hat_); }
  // (1/pi) int f(zeta) / conj(z - zeta) dA
  Eigen::MatrixXcd d_inverse(Eigen::MatrixXcd f) const { return convolve(std::move(f), d_hat_); }

 private:
  Eigen::MatrixXcd convolve(Eigen::MatrixXcd f, const Eigen::MatrixXcd& kernel_hat) const {
    fft_.forward_inplace(f);
    f = f.cwiseProduct(kernel_hat);
    fft_.inverse_inplace(f);
    return f / static_cast<double>(n_) / static_cast<double>(n_);
  }

  int n_;
  double h_;
  Fft2d fft_;
  Eigen::MatrixXcd dbar_hat_, d_hat_;
};

}  // namespace

OracleResult scattering_area_oracle(const PotentialField& q, cplx k, const OracleConfig& config) {
  OracleResult res;
  if (q.identically_zero) {
    res.first_column.converged = res.second_column.converged = true;
    return res;
  }
  if (!(q.support_radius > 0.0)) throw parameter_error("potential needs a positive support radius");
  if (!(config.cell_factor > 2.03)) throw parameter_error("cell_factor must exceed 2.03");
  const double support = q.support_radius;
  const double side = config.cell_factor * 2.0 * support;
  const PeriodicCell cell(config.resolution, side, 2.05 * support);
  const int n = config.resolution;
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  const cplx kc = std::conj(k);

  Eigen::MatrixXcd qv(n, n), ek(n, n), ekc(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const cplx z = cell.point(a, b);
      qv(a, b) = q(z);
      ek(a, b) = twist(z, k);
      ekc(a, b) = twist(z, kc);
    }
  const Eigen::MatrixXcd qc = qv.conjugate();
  const double area = cell.h() * cell.h();

  if (config.born) {
    res.value.s21 = -I / pi * ek.cwiseProduct(qc).sum() * area;
    res.value.s12 = I / pi * ekc.conjugate().cwiseProduct(qv).sum() * area;
    res.first_column.converged = res.second_column.converged = true;
    return res;
  }

  using Vec = Eigen::VectorXcd;
  using Map = Eigen::Map<const Eigen::MatrixXcd>;

  // First column: a = m11 - 1, b = m21.
  //   a - dbar^{-1}(q b) = 0
  //   b - e(-k) d^{-1}(e(k) conj(q) a) = e(-k) d^{-1}(e(k) conj(q))
  const Eigen::MatrixXcd ek_inv = ek.conjugate();
  auto col1 = [&](const Vec& x) -> Vec {
    Map a(x.data(), n, n), b(x.data() + nn, n, n);
    Vec y(2 * nn);
    Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n) = a - cell.dbar_inverse(qv.cwiseProduct(b));
    Eigen::Map<Eigen::MatrixXcd>(y.data() + nn, n, n) =
        b - ek_inv.cwiseProduct(cell.d_inverse(ek.cwiseProduct(qc).cwiseProduct(a)));
    return y;
  };
  Vec rhs1 = Vec::Zero(2 * nn);
  Eigen::Map<Eigen::MatrixXcd>(rhs1.data() + nn, n, n) = ek_inv.cwiseProduct(cell.d_inverse(ek.cwiseProduct(qc)));
  Vec x1 = Vec::Zero(2 * nn);
  res.first_column = gmres<cplx>(col1, rhs1, x1, config.gmres);
  if (!res.first_column.converged)
    throw numerical_error("area oracle (first column) did not converge: residual " +
                          std::to_string(res.first_column.relative_residual));
  const Map m11_minus_1(x1.data(), n, n);
  res.value.s21 = -I / pi * (ek.cwiseProduct(qc).cwiseProduct(m11_minus_1.array().matrix() +
                                                                  Eigen::MatrixXcd::Ones(n, n)))
                                .sum() *
                  area;

  // Second column: c = m12, d = m22 - 1.
  //   c - e(conj k) dbar^{-1}(e(-conj k) q d) = e(conj k) dbar^{-1}(e(-conj k) q)
  //   d - d^{-1}(conj(q) c) = 0
  const Eigen::MatrixXcd ekc_inv = ekc.conjugate();
  auto col2 = [&](const Vec& x) -> Vec {
    Map c(x.data(), n, n), d(x.data() + nn, n, n);
    Vec y(2 * nn);
    Eigen::Map<Eigen::MatrixXcd>(y.data(), n, n) =
        c - ekc.cwiseProduct(cell.dbar_inverse(ekc_inv.cwiseProduct(qv).cwiseProduct(d)));
    Eigen::Map<Eigen::MatrixXcd>(y.data() + nn, n, n) = d - cell.d_inverse(qc.cwiseProduct(c));
    return y;
  };
  Vec rhs2 = Vec::Zero(2 * nn);
  Eigen::Map<Eigen::MatrixXcd>(rhs2.data(), n, n) = ekc.cwiseProduct(cell.dbar_inverse(ekc_inv.cwiseProduct(qv)));
  Vec x2 = Vec::Zero(2 * nn);
  res.second_column = gmres<cplx>(col2, rhs2, x2, config.gmres);
  if (!res.second_column.converged)
    throw numerical_error("area oracle (second column) did not converge: residual " +
                          std::to_string(res.second_column.relative_residual));
  const Map m22_minus_1(x2.data() + nn, n, n);
  res.value.s12 =
      I / pi * (ekc_inv.cwiseProduct(qv).cwiseProduct(m22_minus_1.array().matrix() + Eigen::MatrixXcd::Ones(n, n)))
                   .sum() *
      area;
  return res;
}

namespace {

void check_symmetric(const ScatteringGrid& g) {
  const int s = g.grid.side();
  if (g.s12.rows() != s || g.s12.cols() != s || g.s21.rows() != s || g.s21.cols() != s)
    throw parameter_error("scattering arrays do not match the k-grid");
  for (int ix = 0; ix < s; ++ix)
    for (int iy = 0; iy < s; ++iy) {
      if (g.grid.active(ix, iy) && ix > 0 && iy > 0) continue;
      if (g.s12(ix, iy) != cplx{0.0} || g.s21(ix, iy) != cplx{0.0})
        throw parameter_error("scattering grid is not symmetric under k -> -conj(k): value outside the truncation disk");
    }
}

}  // namespace

ScatteringGrid dual_scattering(const ScatteringGrid& grid) {
  check_symmetric(grid);
  ScatteringGrid out = zero_scattering(grid.grid);
  const int s = grid.grid.side();
  for (int ix = 1; ix < s; ++ix)
    for (int iy = 0; iy < s; ++iy) {
      out.s21(ix, iy) = grid.s12(s - ix, iy);
      out.s12(ix, iy) = grid.s21(s - ix, iy);
    }
  return out;
}

void write_scattering(const ScatteringGrid& grid, const std::filesystem::path& bin_path,
                      const std::filesystem::path& json_path, const nlohmann::json& extra) {
  const int s = grid.grid.side();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(4) * s * s);
  for (const Eigen::MatrixXcd* comp : {&grid.s12, &grid.s21})
    for (int ix = 0; ix < s; ++ix)
      for (int iy = 0; iy < s; ++iy) {
        flat.push_back((*comp)(ix, iy).real());
        flat.push_back((*comp)(ix, iy).imag());
      }
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw io_error("cannot open " + bin_path.string());
  bin.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!bin) throw io_error("failed writing " + bin_path.string());

  nlohmann::json side = {{"m", grid.grid.m},
                         {"h_k", grid.grid.h_k},
                         {"R_k", grid.grid.R_k},
                         {"layout", "[component][ix][iy][re,im] float64 little-endian"},
                         {"components", {"s12", "s21"}},
                         {"k_of_index", "h_k * ((ix - 2^(m-1)) + i (iy - 2^(m-1)))"}};
  if (extra.is_object()) side.update(extra);
  std::ofstream js(json_path);
  if (!js) throw io_error("cannot open " + json_path.string());
  js << side.dump(2) << '\n';
}

ScatteringGrid read_scattering(const std::filesystem::path& bin_path, const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw io_error("cannot open " + json_path.string());
  nlohmann::json side;
  try {
    js >> side;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("malformed scattering sidecar: " + std::string(e.what()));
  }
  const KGrid grid = make_k_grid(side.at("m").get<int>(), side.at("R_k").get<double>(), side.at("h_k").get<double>());
  ScatteringGrid out = zero_scattering(grid);
  const int s = grid.side();
  std::vector<double> flat(static_cast<std::size_t>(4) * s * s);
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw io_error("cannot open " + bin_path.string());
  bin.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(flat.size() * sizeof(double)))
    throw io_error("scattering binary is truncated");
  std::size_t p = 0;
  for (Eigen::MatrixXcd* comp : {&out.s12, &out.s21})
    for (int ix = 0; ix < s; ++ix)
      for (int iy = 0; iy < s; ++iy, p += 2) (*comp)(ix, iy) = {flat[p], flat[p + 1]};
  return out;
}

nlohmann::json to_json(const TraceTable& table) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : table.traces) arr.push_back(to_json(t));
  return {{"m", table.grid.m}, {"h_k", table.grid.h_k}, {"R_k", table.grid.R_k}, {"traces", arr}};
}

TraceTable trace_table_from_json(const nlohmann::json& j) {
  try {
    const KGrid grid = make_k_grid(j.at("m").get<int>(), j.at("R_k").get<double>(), j.at("h_k").get<double>());
    TraceTable table = empty_table(grid);
    const auto& arr = j.at("traces");
    if (arr.size() != table.traces.size()) throw io_error("trace file does not cover the active k-grid");
    const int s = grid.side();
    for (const auto& item : arr) {
      CGOTrace t = trace_from_json(item);
      const int ix = static_cast<int>(std::lround(t.k.real() / grid.h_k)) + grid.half();
      const int iy = static_cast<int>(std::lround(t.k.imag() / grid.h_k)) + grid.half();
      if (ix < 0 || iy < 0 || ix >= s || iy >= s) throw io_error("trace k lies off the grid");
      const int id = table.node_of[static_cast<std::size_t>(ix) * s + iy];
      if (id < 0) throw io_error("trace k lies outside the truncation disk");
      table.traces[id] = std::move(t);
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("malformed trace table: ") + e.what());
  }
}

}  // namespace calderon
