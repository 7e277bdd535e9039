#include "calderon/recon.hpp"

#include <fstream>
#include <map>

#include "calderon/error.hpp"
#include "calderon/parallel.hpp"

namespace calderon {

const char* to_string(GammaRule rule) {
  return rule == GammaRule::squared_real_part ? "squared_real_part" : "real_part";
}

GammaRule gamma_rule_from_string(const std::string& s) {
  if (s == "squared_real_part" || s == "squared") return GammaRule::squared_real_part;
  if (s == "real_part" || s == "real") return GammaRule::real_part;
  throw parameter_error("unknown gamma rule '" + s + "'");
}

namespace {

void finish_point(PointValue& p, GammaRule rule, double clamp) {
  const cplx est = rule == GammaRule::squared_real_part ? p.m_at_zero * p.m_at_zero : p.m_at_zero;
  const double re = rule == GammaRule::squared_real_part ? p.m_at_zero.real() * p.m_at_zero.real() : est.real();
  p.imag_residual = std::abs(est.imag());
  p.clamped = !(re >= clamp);
  p.gamma = p.clamped ? clamp : re;
}

}  // namespace

PointValue reconstruct_point(const DbarSolver& solver, cplx z, const ReconOptions& options) {
  DbarReport rep;
  PointValue p;
  p.m_at_zero = evaluate_at_zero(solver.solve(z, options.solver, &rep));
  p.iterations = rep.gmres.iterations;
  finish_point(p, options.rule, options.gamma_min_clamp);
  return p;
}

std::vector<cplx> z_grid_nodes(const ZGridSpec& spec) {
  if (spec.n < 1) throw parameter_error("z-grid size must be positive");
  if (!(spec.radius > 0.0)) throw parameter_error("z-grid radius must be positive");
  std::vector<cplx> out;
  const double step = 2.0 * spec.radius / spec.n;
  for (int iy = 0; iy < spec.n; ++iy)
    for (int ix = 0; ix < spec.n; ++ix) {
      const cplx z(-spec.radius + (ix + 0.5) * step, -spec.radius + (iy + 0.5) * step);
      if (std::abs(z) < spec.radius) out.push_back(z);
    }
  return out;
}

std::size_t ReconImage::failed_count() const {
  std::size_t c = 0;
  for (const auto& f : failures) c += f.empty() ? 0 : 1;
  return c;
}

std::size_t ReconImage::clamped_count() const {
  std::size_t c = 0;
  for (bool b : clamped) c += b ? 1 : 0;
  return c;
}

ReconImage reconstruct_grid(const DbarSolver& solver, const ZGridSpec& spec, const ReconOptions& options) {
  ReconImage img;
  img.spec = spec;
  img.z_nodes = z_grid_nodes(spec);
  const std::size_t n = img.z_nodes.size();
  img.gamma_values.assign(n, std::numeric_limits<double>::quiet_NaN());
  img.imag_residuals.assign(n, std::numeric_limits<double>::quiet_NaN());
  img.m_at_zero.assign(n, cplx{std::numeric_limits<double>::quiet_NaN(), 0.0});
  img.clamped.assign(n, false);
  img.failures.assign(n, std::string());
  img.iterations.assign(n, 0);
  parallel_for(static_cast<int>(n), options.workers, [&](int i) {
    try {
      const PointValue p = reconstruct_point(solver, img.z_nodes[i], options);
      img.gamma_values[i] = p.gamma;
      img.imag_residuals[i] = p.imag_residual;
      img.m_at_zero[i] = p.m_at_zero;
      img.iterations[i] = p.iterations;
      img.clamped[i] = p.clamped;
    } catch (const std::exception& e) {
      img.failures[i] = e.what();
    }
  });
  int max_it = 0;
  for (int it : img.iterations) max_it = std::max(max_it, it);
  img.metadata = {{"rule", to_string(options.rule)},
                  {"gamma_min_clamp", options.gamma_min_clamp},
                  {"solver", to_json(options.solver)},
                  {"z_grid", {{"n", spec.n}, {"radius", spec.radius}}},
                  {"k_grid", {{"m", solver.grid().m}, {"h_k", solver.grid().h_k}, {"R_k", solver.grid().R_k}}},
                  {"max_gmres_iterations", max_it}};
  return img;
}

ReconImage apply_rule(const ReconImage& image, GammaRule rule, double gamma_min_clamp) {
  ReconImage out = image;
  for (std::size_t i = 0; i < out.z_nodes.size(); ++i) {
    if (!out.failures[i].empty()) continue;
    PointValue p;
    p.m_at_zero = out.m_at_zero[i];
    finish_point(p, rule, gamma_min_clamp);
    out.gamma_values[i] = p.gamma;
    out.imag_residuals[i] = p.imag_residual;
    out.clamped[i] = p.clamped;
  }
  out.metadata["rule"] = to_string(rule);
  out.metadata["gamma_min_clamp"] = gamma_min_clamp;
  return out;
}

double rotational_deviation(const ReconImage& recon) {
  std::map<long long, std::vector<double>> rings;
  for (std::size_t i = 0; i < recon.z_nodes.size(); ++i) {
    if (!recon.failures[i].empty()) continue;
    rings[std::llround(std::abs(recon.z_nodes[i]) * 1e9)].push_back(recon.gamma_values[i]);
  }
  double worst = 0.0;
  for (const auto& [key, vals] : rings) {
    if (vals.size() < 2) continue;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    worst = std::max(worst, std::sqrt(var) / std::abs(mean));
  }
  return worst;
}

Metrics compare_fields(const ReconImage& recon, const ConductivityField& truth) {
  Metrics m;
  double num = 0.0, den = 0.0, diff_max = 0.0, truth_max = 0.0;
  for (std::size_t i = 0; i < recon.z_nodes.size(); ++i) {
    if (!recon.failures[i].empty()) {
      ++m.failed_nodes;
      continue;
    }
    const double t = truth(recon.z_nodes[i]);
    const double d = recon.gamma_values[i] - t;
    num += d * d;
    den += t * t;
    diff_max = std::max(diff_max, std::abs(d));
    truth_max = std::max(truth_max, std::abs(t));
    m.max_imag_ratio = std::max(m.max_imag_ratio, recon.imag_residuals[i] / std::abs(recon.gamma_values[i]));
    if (recon.clamped[i]) ++m.clamped_nodes;
  }
  m.relative_l2 = den > 0.0 ? std::sqrt(num / den) : 0.0;
  m.relative_linf = truth_max > 0.0 ? diff_max / truth_max : 0.0;
  m.symmetry_deviation = rotational_deviation(recon);
  return m;
}

nlohmann::json to_json(const Metrics& m) {
  return {{"relative_l2", m.relative_l2},         {"relative_linf", m.relative_linf},
          {"max_imag_ratio", m.max_imag_ratio},   {"symmetry_deviation", m.symmetry_deviation},
          {"failed_nodes", m.failed_nodes},       {"clamped_nodes", m.clamped_nodes}};
}

void write_recon_csv(const ReconImage& image, const std::filesystem::path& path, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string());
  out.precision(17);
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "x,y,gamma,imag_residual\n";
  for (std::size_t i = 0; i < image.z_nodes.size(); ++i)
    out << image.z_nodes[i].real() << ',' << image.z_nodes[i].imag() << ',' << image.gamma_values[i] << ','
        << image.imag_residuals[i] << '\n';
  if (!out) throw io_error("failed writing " + path.string());
}

void write_recon_binary(const ReconImage& image, const std::filesystem::path& bin_path,
                        const std::filesystem::path& json_path, const nlohmann::json& extra) {
  std::vector<double> flat;
  flat.reserve(image.z_nodes.size() * 4);
  for (std::size_t i = 0; i < image.z_nodes.size(); ++i) {
    flat.push_back(image.z_nodes[i].real());
    flat.push_back(image.z_nodes[i].imag());
    flat.push_back(image.gamma_values[i]);
    flat.push_back(image.imag_residuals[i]);
  }
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw io_error("cannot open " + bin_path.string());
  bin.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
  nlohmann::json side = image.metadata;
  side["layout"] = "[node][x, y, gamma, imag_residual] float64 little-endian";
  side["n_points"] = image.z_nodes.size();
  nlohmann::json failures = nlohmann::json::object();
  for (std::size_t i = 0; i < image.failures.size(); ++i)
    if (!image.failures[i].empty()) failures[std::to_string(i)] = image.failures[i];
  side["failures"] = failures;
  side["clamped_nodes"] = image.clamped_count();
  std::vector<std::size_t> clamped_idx;
  for (std::size_t i = 0; i < image.clamped.size(); ++i)
    if (image.clamped[i]) clamped_idx.push_back(i);
  side["clamped_indices"] = clamped_idx;
  nlohmann::json m0 = nlohmann::json::array();
  for (const cplx& m : image.m_at_zero) m0.push_back({m.real(), m.imag()});
  side["m_at_zero"] = m0;
  side["gmres_iterations"] = image.iterations;
  if (extra.is_object()) side.update(extra);
  std::ofstream js(json_path);
  if (!js) throw io_error("cannot open " + json_path.string());
  js << side.dump(2) << '\n';
}

ReconImage read_recon_binary(const std::filesystem::path& bin_path, const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw io_error("cannot open " + json_path.string());
  nlohmann::json side;
  try {
    js >> side;
    ReconImage img;
    img.metadata = side;
    img.spec.n = side.at("z_grid").at("n").get<int>();
    img.spec.radius = side.at("z_grid").at("radius").get<double>();
    const std::size_t n = side.at("n_points").get<std::size_t>();
    std::vector<double> flat(4 * n);
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw io_error("cannot open " + bin_path.string());
    bin.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (bin.gcount() != static_cast<std::streamsize>(flat.size() * sizeof(double)))
      throw io_error("reconstruction binary is truncated");
    img.failures.assign(n, std::string());
    img.clamped.assign(n, false);
    img.iterations = side.value("gmres_iterations", std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
      img.z_nodes.emplace_back(flat[4 * i], flat[4 * i + 1]);
      img.gamma_values.push_back(flat[4 * i + 2]);
      img.imag_residuals.push_back(flat[4 * i + 3]);
      const auto& m = side.at("m_at_zero").at(i);
      img.m_at_zero.emplace_back(m.at(0).is_null() ? std::nan("") : m.at(0).get<double>(),
                                 m.at(1).is_null() ? std::nan("") : m.at(1).get<double>());
    }
    for (const auto& [key, msg] : side.at("failures").items()) img.failures.at(std::stoul(key)) = msg.get<std::string>();
    for (std::size_t i : side.at("clamped_indices").get<std::vector<std::size_t>>()) img.clamped.at(i) = true;
    return img;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("malformed reconstruction sidecar: " + std::string(e.what()));
  }
}

}  // namespace calderon
