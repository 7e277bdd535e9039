#include "calderon/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "calderon/error.hpp"

namespace calderon {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Stage s) {
  switch (s) {
    case Stage::forward: return "forward";
    case Stage::traces: return "traces";
    case Stage::scattering: return "scattering";
    case Stage::recon: return "recon";
    case Stage::metrics: return "metrics";
  }
  return "?";
}

std::set<Stage> parse_stages(const std::string& list) {
  std::set<Stage> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    item = item.substr(b, e - b + 1);
    if (item == "all") {
      out.insert({Stage::forward, Stage::traces, Stage::scattering, Stage::recon, Stage::metrics});
    } else if (item == "traces-only" || item == "traces") {
      out.insert(Stage::traces);
    } else if (item == "forward") {
      out.insert(Stage::forward);
    } else if (item == "scattering") {
      out.insert(Stage::scattering);
    } else if (item == "recon" || item == "dbar") {
      out.insert(Stage::recon);
    } else if (item == "metrics") {
      out.insert(Stage::metrics);
    } else {
      throw parameter_error("unknown stage '" + item + "'");
    }
  }
  if (out.empty()) throw parameter_error("empty stage list");
  return out;
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw parameter_error(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw parameter_error("unknown key '" + key + "' in " + where);
  }
}

const char* method_name(ExtensionMethod m) {
  switch (m) {
    case ExtensionMethod::automatic: return "automatic";
    case ExtensionMethod::analytic: return "analytic";
    case ExtensionMethod::fem: return "fem";
  }
  return "?";
}

ExtensionMethod method_from(const std::string& s) {
  if (s == "automatic") return ExtensionMethod::automatic;
  if (s == "analytic") return ExtensionMethod::analytic;
  if (s == "fem") return ExtensionMethod::fem;
  throw parameter_error("unknown extension method '" + s + "'");
}

void validate(const PipelineConfig& c) {
  const BoundaryGeometry geom = make_disk_geometry(c.n_nodes, c.radius);
  if (c.max_mode < 1 || c.max_mode > c.n_nodes / 2 - 1)
    throw parameter_error("max_mode must lie in [1, n_nodes/2 - 1]");
  if (c.fem.mesh_resolution < 2) throw parameter_error("fem.resolution must be at least 2");
  const KGrid grid = make_k_grid(c.k_m, c.R_k, c.h_k);
  if (grid.R_k > c.regularization.k_max) throw parameter_error("R_k exceeds k_max");
  if (!(c.regularization.svd_cutoff > 0.0 && c.regularization.svd_cutoff < 1.0))
    throw parameter_error("svd_cutoff must lie in (0, 1)");
  if (!(c.regularization.residual_tol > 0.0)) throw parameter_error("residual_tol must be positive");
  if (!(c.solver.tol > 0.0) || c.solver.max_iter < 1 || c.solver.restart < 1)
    throw parameter_error("solver settings out of range");
  if (c.z_grid < 1) throw parameter_error("z_grid must be positive");
  if (!(c.gamma_min_clamp > 0.0)) throw parameter_error("gamma_min_clamp must be positive");
  if (!(c.extend.outer_radius > c.radius)) throw parameter_error("extend.outer_radius must exceed the radius");
  if (c.extend.options.n_angular < 8 || c.extend.options.n_radial < 0)
    throw parameter_error("extend mesh sizes out of range");
  if (c.workers < 0) throw parameter_error("workers must be non-negative");
  if (c.phantom) ConductivityField::from_json(*c.phantom).validate(geom.radius);
  ConductivityField::from_json(c.extend.annulus);
}

json numeric_settings(const PipelineConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  j.erase("workers");
  j.erase("stages");
  return j;
}

void write_json(const fs::path& path, const json& j, int indent = 2) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string());
  out << j.dump(indent) << '\n';
  if (!out) throw io_error("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw io_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create " + dir.string() + ": " + ec.message());
}

void check_hash(const json& j, const std::string& hash, const fs::path& path) {
  if (j.value("config_hash", std::string()) != hash)
    throw parameter_error(path.string() + " was produced by a different configuration");
}

template <typename F>
auto staged(Stage stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("[stage ") + to_string(stage) + "] " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::numerical, std::string("[stage ") + to_string(stage) + "] " + e.what());
  }
}

void say(const ProgressSink& log, const std::string& msg) {
  if (log) log(msg);
}

DtNMap load_dtn(const PipelineConfig& c, const fs::path& path) {
  const json j = read_json(path);
  DtNMap map = dtn_from_json(j, c.n_nodes);
  if (map.geometry.n_nodes != c.n_nodes || std::abs(map.radius() - c.radius) > 1e-12)
    throw parameter_error(path.string() + " does not match the configured geometry");
  return map;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  try {
    reject_unknown(j, {"phantom", "geometry", "max_mode", "fem", "k_grid", "regularization", "solver", "recon",
                       "extend", "workers", "output_dir", "stages"},
                   "configuration");
    if (j.contains("phantom") && !j.at("phantom").is_null()) c.phantom = j.at("phantom");
    if (j.contains("geometry")) {
      const json& g = j.at("geometry");
      reject_unknown(g, {"n_nodes", "radius"}, "geometry");
      c.n_nodes = g.value("n_nodes", c.n_nodes);
      c.radius = g.value("radius", c.radius);
    }
    c.max_mode = j.value("max_mode", c.max_mode);
    if (j.contains("fem")) {
      const json& f = j.at("fem");
      reject_unknown(f, {"resolution", "reference_correction"}, "fem");
      c.fem.mesh_resolution = f.value("resolution", c.fem.mesh_resolution);
      c.fem.reference_correction = f.value("reference_correction", c.fem.reference_correction);
    }
    if (j.contains("k_grid")) {
      const json& k = j.at("k_grid");
      reject_unknown(k, {"m", "R_k", "h_k", "k_max"}, "k_grid");
      c.k_m = k.value("m", c.k_m);
      c.R_k = k.value("R_k", c.R_k);
      c.h_k = k.value("h_k", c.h_k);
      c.regularization.k_max = k.value("k_max", c.regularization.k_max);
    }
    if (j.contains("regularization")) {
      const json& r = j.at("regularization");
      reject_unknown(r, {"svd_cutoff", "residual_tol"}, "regularization");
      c.regularization.svd_cutoff = r.value("svd_cutoff", c.regularization.svd_cutoff);
      c.regularization.residual_tol = r.value("residual_tol", c.regularization.residual_tol);
    }
    if (j.contains("solver")) {
      reject_unknown(j.at("solver"), {"tol", "max_iter", "restart"}, "solver");
      c.solver = solver_config_from_json(j.at("solver"));
    }
    if (j.contains("recon")) {
      const json& r = j.at("recon");
      reject_unknown(r, {"z_grid", "rule", "gamma_min_clamp"}, "recon");
      c.z_grid = r.value("z_grid", c.z_grid);
      if (r.contains("rule")) c.rule = gamma_rule_from_string(r.at("rule").get<std::string>());
      c.gamma_min_clamp = r.value("gamma_min_clamp", c.gamma_min_clamp);
    }
    if (j.contains("extend")) {
      const json& e = j.at("extend");
      reject_unknown(e, {"outer_radius", "annulus", "method", "n_angular", "n_radial"}, "extend");
      c.extend.outer_radius = e.value("outer_radius", c.extend.outer_radius);
      if (e.contains("annulus")) c.extend.annulus = e.at("annulus");
      if (e.contains("method")) c.extend.options.method = method_from(e.at("method").get<std::string>());
      c.extend.options.n_angular = e.value("n_angular", c.extend.options.n_angular);
      c.extend.options.n_radial = e.value("n_radial", c.extend.options.n_radial);
    }
    c.workers = j.value("workers", c.workers);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("stages")) {
      const json& s = j.at("stages");
      if (s.is_string()) {
        c.stages = parse_stages(s.get<std::string>());
      } else {
        std::string joined;
        for (const auto& item : s) joined += item.get<std::string>() + ",";
        c.stages = parse_stages(joined);
      }
    }
  } catch (const json::exception& e) {
    throw parameter_error(std::string("malformed configuration: ") + e.what());
  }
  validate(c);
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw parameter_error("cannot open configuration " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw parameter_error("configuration " + path.string() + " is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(j);
}

json to_json(const PipelineConfig& c) {
  std::vector<std::string> stages;
  for (Stage s : c.stages) stages.emplace_back(to_string(s));
  return {{"phantom", c.phantom ? *c.phantom : json(nullptr)},
          {"geometry", {{"n_nodes", c.n_nodes}, {"radius", c.radius}}},
          {"max_mode", c.max_mode},
          {"fem", {{"resolution", c.fem.mesh_resolution}, {"reference_correction", c.fem.reference_correction}}},
          {"k_grid", {{"m", c.k_m}, {"R_k", c.R_k}, {"h_k", c.h_k}, {"k_max", c.regularization.k_max}}},
          {"regularization",
           {{"svd_cutoff", c.regularization.svd_cutoff}, {"residual_tol", c.regularization.residual_tol}}},
          {"solver", to_json(c.solver)},
          {"recon", {{"z_grid", c.z_grid}, {"rule", to_string(c.rule)}, {"gamma_min_clamp", c.gamma_min_clamp}}},
          {"extend",
           {{"outer_radius", c.extend.outer_radius},
            {"annulus", c.extend.annulus},
            {"method", method_name(c.extend.options.method)},
            {"n_angular", c.extend.options.n_angular},
            {"n_radial", c.extend.options.n_radial}}},
          {"workers", c.workers},
          {"output_dir", c.output_dir.string()},
          {"stages", stages}};
}

std::string config_hash(const PipelineConfig& c) {
  const std::string text = numeric_settings(c).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ForwardResult run_forward(const PipelineConfig& c, const ProgressSink& log) {
  return staged(Stage::forward, [&] {
    if (!c.phantom) throw parameter_error("the forward stage needs a phantom");
    const ConductivityField gamma = ConductivityField::from_json(*c.phantom);
    const BoundaryGeometry geom = make_disk_geometry(c.n_nodes, c.radius);
    ForwardResult r;
    json provenance;
    if (gamma.is_unit()) {
      say(log, "forward: unit conductivity, exact map");
      r.map = dtn_unit(geom, c.max_mode);
      provenance = {{"method", "unit"}};
    } else {
      say(log, "forward: P1 finite elements, " + std::to_string(c.fem.mesh_resolution) + " rings");
      FemReport rep;
      r.map = dtn_fem(gamma, geom, c.max_mode, c.fem, &rep);
      provenance = {{"method", "fem"},
                    {"fem_resolution", c.fem.mesh_resolution},
                    {"reference_correction", c.fem.reference_correction},
                    {"n_vertices", rep.n_vertices},
                    {"n_boundary_vertices", rep.n_boundary_vertices}};
    }
    ensure_dir(c.output_dir);
    json j = to_json(r.map);
    j["config_hash"] = config_hash(c);
    j["phantom"] = *c.phantom;
    j["provenance"] = provenance;
    r.path = c.output_dir / "dtn.json";
    write_json(r.path, j);
    say(log, "forward: wrote " + r.path.string());
    return r;
  });
}

ExtendResult run_extend(const PipelineConfig& c, const fs::path& dtn_path, const ProgressSink& log) {
  return staged(Stage::forward, [&] {
    const DtNMap inner = load_dtn(c, dtn_path);
    const ConductivityField annulus = ConductivityField::from_json(c.extend.annulus);
    const BoundaryGeometry outer = make_disk_geometry(c.n_nodes, c.extend.outer_radius);
    ExtensionReport rep;
    ExtendResult r;
    say(log, "extend: radius " + std::to_string(c.radius) + " -> " + std::to_string(c.extend.outer_radius));
    r.map = extend_dtn(inner, annulus, outer, c.extend.options, &rep);
    json report = {{"config_hash", config_hash(c)},
                   {"method_used", method_name(rep.method_used)},
                   {"coupling_condition", rep.coupling_condition}};
    if (annulus.is_unit()) {
      ExtensionOptions other = c.extend.options;
      other.method = rep.method_used == ExtensionMethod::analytic ? ExtensionMethod::fem : ExtensionMethod::analytic;
      say(log, std::string("extend: cross-checking with the ") + method_name(other.method) + " path");
      const DtNMap alt = extend_dtn(inner, annulus, outer, other);
      r.path_agreement = (alt.matrix - r.map.matrix).cwiseAbs().maxCoeff();
      report["cross_check_method"] = method_name(other.method);
      report["max_entry_difference"] = *r.path_agreement;
    }
    ensure_dir(c.output_dir);
    json j = to_json(r.map);
    j["config_hash"] = config_hash(c);
    j["source"] = dtn_path.string();
    r.path = c.output_dir / "dtn_extended.json";
    write_json(r.path, j);
    write_json(c.output_dir / "extend_report.json", report);
    say(log, "extend: wrote " + r.path.string());
    return r;
  });
}

ReconstructResult run_reconstruct(const PipelineConfig& c, const fs::path& dtn_path, const ProgressSink& log) {
  ReconstructResult result;
  const std::string hash = config_hash(c);
  const fs::path out = c.output_dir;
  ensure_dir(out);
  const auto has = [&](Stage s) { return c.stages.count(s) > 0; };
  const BoundaryGeometry geom = make_disk_geometry(c.n_nodes, c.radius);
  const KGrid grid = make_k_grid(c.k_m, c.R_k, c.h_k);
  const int last = has(Stage::metrics)      ? 4
                   : has(Stage::recon)      ? 3
                   : has(Stage::scattering) ? 2
                   : has(Stage::traces)     ? 1
                                            : 0;

  std::optional<DtNMap> map;
  const auto need_map = [&]() -> const DtNMap& {
    if (!map) {
      if (!fs::exists(dtn_path)) {
        if (!has(Stage::forward)) throw io_error("DtN file " + dtn_path.string() + " does not exist");
        map = run_forward(c, log).map;
        result.written.push_back((c.output_dir / "dtn.json").string());
      } else {
        map = staged(Stage::forward, [&] { return load_dtn(c, dtn_path); });
      }
    }
    return *map;
  };

  std::optional<TraceTable> table;
  if (last >= 1 && (has(Stage::traces) || (last >= 2 && has(Stage::scattering)))) {
    if (has(Stage::traces)) {
      table = staged(Stage::traces, [&] {
        const DtNMap& m = need_map();
        say(log, "traces: solving the boundary system on the k-grid");
        const TraceSolver solver(m, geom, c.regularization);
        TraceTable t = compute_traces(solver, grid, c.workers);
        json j = to_json(t);
        j["config_hash"] = hash;
        write_json(out / "traces.json", j, -1);
        result.written.push_back((out / "traces.json").string());
        say(log, "traces: " + std::to_string(t.traces.size()) + " nodes");
        return t;
      });
    } else {
      table = staged(Stage::traces, [&] {
        const json j = read_json(out / "traces.json");
        check_hash(j, hash, out / "traces.json");
        return trace_table_from_json(j);
      });
    }
  }

  std::optional<ScatteringGrid> scattering;
  if (last >= 2) {
    if (has(Stage::scattering)) {
      scattering = staged(Stage::scattering, [&] {
        say(log, "scattering: boundary quadrature");
        ScatteringGrid s = scattering_from_table(*table, geom, c.workers);
        write_scattering(s, out / "scattering.bin", out / "scattering.json", {{"config_hash", hash}});
        result.written.push_back((out / "scattering.bin").string());
        return s;
      });
    } else if (last >= 3 && has(Stage::recon)) {
      scattering = staged(Stage::scattering, [&] {
        check_hash(read_json(out / "scattering.json"), hash, out / "scattering.json");
        return read_scattering(out / "scattering.bin", out / "scattering.json");
      });
    }
  }

  std::optional<ReconImage> image;
  if (last >= 3) {
    if (has(Stage::recon)) {
      image = staged(Stage::recon, [&] {
        const ScatteringGrid dual = dual_scattering(*scattering);
        write_scattering(dual, out / "scattering_dual.bin", out / "scattering_dual.json",
                         {{"config_hash", hash}, {"dual", true}});
        result.written.push_back((out / "scattering_dual.bin").string());
        say(log, "recon: dbar solves on a " + std::to_string(c.z_grid) + "^2 grid");
        ReconOptions opt;
        opt.rule = c.rule;
        opt.gamma_min_clamp = c.gamma_min_clamp;
        opt.solver = c.solver;
        opt.workers = c.workers;
        ReconImage img = reconstruct_grid(DbarSolver(dual), ZGridSpec{c.z_grid, c.radius}, opt);
        img.metadata["config_hash"] = hash;
        write_recon_csv(img, out / "recon.csv", "config_hash " + hash);
        write_recon_binary(img, out / "recon.bin", out / "recon.json");
        result.written.push_back((out / "recon.csv").string());
        result.written.push_back((out / "recon.bin").string());
        if (img.failed_count() > 0) say(log, "recon: " + std::to_string(img.failed_count()) + " nodes failed");
        return img;
      });
    } else {
      image = staged(Stage::recon, [&] {
        check_hash(read_json(out / "recon.json"), hash, out / "recon.json");
        return read_recon_binary(out / "recon.bin", out / "recon.json");
      });
    }
  }

  if (last >= 4) {
    staged(Stage::metrics, [&] {
      if (!c.phantom) {
        say(log, "metrics: no phantom configured, skipped");
        return 0;
      }
      const Metrics m = compare_fields(*image, ConductivityField::from_json(*c.phantom));
      json j = to_json(m);
      j["config_hash"] = hash;
      j["rule"] = to_string(c.rule);
      j["n_points"] = image->z_nodes.size();
      write_json(out / "metrics.json", j);
      result.written.push_back((out / "metrics.json").string());
      result.metrics = m;
      say(log, "metrics: relative L2 " + std::to_string(m.relative_l2));
      return 0;
    });
  }
  result.image = std::move(image);
  return result;
}

bool VerifyReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

json VerifyReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"detail", c.detail}});
  return {{"checks", arr}, {"preferred_rule", preferred_rule}, {"all_passed", all_passed()}};
}

std::string VerifyReport::summary() const {
  std::ostringstream s;
  for (const auto& c : checks) {
    s << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << "  tol=" << c.tolerance;
    if (!c.detail.empty()) s << "  (" << c.detail << ")";
    s << '\n';
  }
  s << "exponent rule meeting the 10% bound: " << preferred_rule << '\n';
  return s.str();
}

VerifyReport run_verify(const PipelineConfig& c, const ProgressSink& log) {
  if (!c.phantom) throw parameter_error("verify needs a phantom");
  VerifyReport rep;
  const auto add = [&](std::string name, double value, double tol, bool passed, std::string detail = {}) {
    rep.checks.push_back({std::move(name), passed, value, tol, std::move(detail)});
    say(log, "verify: " + rep.checks.back().name + (passed ? " passed" : " FAILED"));
  };
  const ConductivityField gamma = ConductivityField::from_json(*c.phantom);
  const BoundaryGeometry geom = make_disk_geometry(c.n_nodes, c.radius);
  const KGrid grid = make_k_grid(c.k_m, c.R_k, c.h_k);

  say(log, "verify: forward map");
  const DtNMap map = gamma.is_unit() ? dtn_unit(geom, c.max_mode) : dtn_fem(gamma, geom, c.max_mode, c.fem);
  const DtNInvariants inv = check_invariants(map);
  add("dtn.hermitian", inv.symmetry_defect, 1e-8, inv.symmetry_defect <= 1e-8);
  add("dtn.real_operator", inv.reality_defect, 1e-8, inv.reality_defect <= 1e-8);
  add("dtn.constants_in_kernel", std::max(inv.mode0_column, inv.mode0_row), 1e-8,
      std::max(inv.mode0_column, inv.mode0_row) <= 1e-8);
  add("dtn.positive_on_nonconstant", inv.min_eigenvalue, 0.0, inv.min_eigenvalue > 0.0);

  const std::vector<cplx> sample_k = {0.0, {1.0, 0.0}, {0.5, 1.5}, {-2.0, 1.0}, {0.0, -2.5}, {2.1, -2.1}};
  {
    const TraceSolver unit(dtn_unit(geom, c.max_mode), geom, c.regularization);
    double worst = 0.0;
    for (cplx k : sample_k) {
      const CGOTrace t = unit.solve(k);
      for (int j = 0; j < geom.n_nodes; ++j)
        worst = std::max(worst, std::abs(t.psi11(j) - std::exp(I * geom.nodes(j) * k)) + std::abs(t.psi21(j)));
    }
    add("cgo.unit_traces", worst, 1e-6, worst <= 1e-6);
  }

  const TraceSolver solver(map, geom, c.regularization);
  {
    double worst = 0.0;
    for (cplx k : sample_k) {
      const SecondColumnTrace direct = solver.solve_second_column(k);
      const BoundaryFunction sym = second_column_trace(solver.solve(std::conj(k)));
      worst = std::max(worst, (direct.psi12 - sym).cwiseAbs().maxCoeff());
    }
    add("cgo.second_column_symmetry", worst, 1e-6, worst <= 1e-6);
  }

  say(log, "verify: traces and scattering on the k-grid");
  const TraceTable table = compute_traces(solver, grid, c.workers);
  double worst_lsq = 0.0;
  for (const auto& t : table.traces) worst_lsq = std::max(worst_lsq, t.lsq_residual);
  add("cgo.trace_residuals", worst_lsq, c.regularization.residual_tol, worst_lsq <= c.regularization.residual_tol);
  const ScatteringGrid scat = scattering_from_table(table, geom, c.workers);

  {
    const PotentialField q = q_from_gamma(gamma);
    double num = 0.0, den = 0.0;
    const int s = grid.side();
    const int stride = std::max(1, s / 8);
    int count = 0;
    for (int ix = 0; ix < s; ix += stride)
      for (int iy = 0; iy < s; iy += stride) {
        if (!grid.active(ix, iy) || std::abs(grid.node(ix, iy)) > 3.0) continue;
        const ScatteringValue o = scattering_area_oracle(q, grid.node(ix, iy), OracleConfig{}).value;
        num += std::norm(scat.s21(ix, iy) - o.s21);
        den += std::norm(o.s21);
        ++count;
      }
    const double rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    add("scatter.area_oracle_agreement", rel, 1e-2, rel <= 1e-2, std::to_string(count) + " k-nodes with |k| <= 3");
  }
  {
    double inner = 0.0, outer = 0.0;
    const int s = grid.side();
    for (int ix = 0; ix < s; ++ix)
      for (int iy = 0; iy < s; ++iy) {
        const double r = std::abs(grid.node(ix, iy));
        if (!grid.active(ix, iy)) continue;
        const double v = std::abs(scat.s21(ix, iy));
        if (r <= 0.5 * grid.R_k) inner = std::max(inner, v);
        if (r > 0.75 * grid.R_k) outer = std::max(outer, v);
      }
    add("scatter.decay", outer, inner, outer <= inner, "max |S21| outer annulus vs inner disk");
  }
  {
    const ScatteringGrid dual = dual_scattering(scat);
    const ScatteringGrid back = dual_scattering(dual);
    const double d = std::max((back.s12 - scat.s12).cwiseAbs().maxCoeff(), (back.s21 - scat.s21).cwiseAbs().maxCoeff());
    add("scatter.dual_involution", d, 0.0, d == 0.0);

    say(log, "verify: reconstruction");
    ReconOptions opt;
    opt.rule = c.rule;
    opt.gamma_min_clamp = c.gamma_min_clamp;
    opt.solver = c.solver;
    opt.workers = c.workers;
    const ReconImage img = reconstruct_grid(DbarSolver(dual), ZGridSpec{c.z_grid, c.radius}, opt);
    std::vector<std::string> passing;
    std::string detail;
    Metrics configured;
    for (GammaRule rule : {GammaRule::real_part, GammaRule::squared_real_part}) {
      const Metrics m = compare_fields(apply_rule(img, rule, c.gamma_min_clamp), gamma);
      if (rule == c.rule) configured = m;
      detail += std::string(detail.empty() ? "" : ", ") + to_string(rule) + " L2=" + std::to_string(m.relative_l2);
      if (m.relative_l2 <= 0.1) passing.emplace_back(to_string(rule));
    }
    add("recon.relative_l2", configured.relative_l2, 0.1, configured.relative_l2 <= 0.1, to_string(c.rule));
    add("recon.rotational_symmetry", configured.symmetry_deviation, 0.02, configured.symmetry_deviation <= 0.02);
    add("recon.imaginary_residual", configured.max_imag_ratio, 0.05, configured.max_imag_ratio <= 0.05);
    add("recon.failed_nodes", static_cast<double>(configured.failed_nodes), 0.0, configured.failed_nodes == 0);
    rep.preferred_rule = passing.empty() ? "none" : passing.size() == 2 ? "both" : passing.front();
    if (gamma.is_unit())
      add("recon.exponent_arbitration", static_cast<double>(passing.size()), 1.0, true,
          "not applicable to gamma == 1: " + detail);
    else
      add("recon.exponent_arbitration", static_cast<double>(passing.size()), 1.0, passing.size() == 1, detail);
  }

  ensure_dir(c.output_dir);
  json j = rep.to_json();
  j["config_hash"] = config_hash(c);
  write_json(c.output_dir / "verify.json", j);
  return rep;
}

}  // namespace calderon
