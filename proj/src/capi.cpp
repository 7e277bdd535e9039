#include "calderon/calderon.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <string>

#include "calderon/error.hpp"
#include "calderon/pipeline.hpp"

struct cal_config {
  calderon::PipelineConfig config;
};

struct cal_dtn {
  calderon::DtNMap map;
};

struct cal_scattering {
  calderon::ScatteringGrid grid;
};

namespace {

thread_local std::string last_error;

std::mutex log_mutex;
cal_log_fn log_fn = nullptr;
void* log_user = nullptr;

void log_message(const std::string& msg) {
  std::lock_guard lock(log_mutex);
  if (log_fn) log_fn(msg.c_str(), log_user);
}

cal_status status_of(calderon::ErrorKind kind) {
  switch (kind) {
    case calderon::ErrorKind::parameter: return CAL_ERR_PARAMETER;
    case calderon::ErrorKind::domain: return CAL_ERR_DOMAIN;
    case calderon::ErrorKind::io: return CAL_ERR_IO;
    case calderon::ErrorKind::numerical: return CAL_ERR_NUMERICAL;
  }
  return CAL_ERR_INTERNAL;
}

template <typename F>
cal_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return CAL_OK;
  } catch (const calderon::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CAL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CAL_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return CAL_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw calderon::parameter_error(std::string(what) + " is NULL");
}

void copy_out(const std::string& s, char* buffer, std::size_t size) {
  if (!buffer) return;
  if (size < s.size() + 1) throw calderon::parameter_error("output buffer too small");
  std::memcpy(buffer, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* cal_version(void) { return "1.0.0"; }

const char* cal_last_error(void) { return last_error.c_str(); }

const char* cal_status_name(cal_status status) {
  switch (status) {
    case CAL_OK: return "ok";
    case CAL_ERR_PARAMETER: return "parameter error";
    case CAL_ERR_DOMAIN: return "domain error";
    case CAL_ERR_IO: return "i/o error";
    case CAL_ERR_NUMERICAL: return "numerical error";
    case CAL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void cal_set_log_callback(cal_log_fn fn, void* user) {
  std::lock_guard lock(log_mutex);
  log_fn = fn;
  log_user = user;
}

cal_status cal_config_from_json(const char* json_text, cal_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = nullptr;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      throw calderon::parameter_error(std::string("configuration is not valid JSON: ") + e.what());
    }
    *out = new cal_config{calderon::pipeline_config_from_json(j)};
  });
}

cal_status cal_config_load(const char* path, cal_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new cal_config{calderon::load_pipeline_config(path)};
  });
}

void cal_config_free(cal_config* config) { delete config; }

cal_status cal_config_set_output_dir(cal_config* config, const char* dir) {
  return guarded([&] {
    require(config, "config");
    require(dir, "dir");
    if (!*dir) throw calderon::parameter_error("output directory is empty");
    config->config.output_dir = dir;
  });
}

cal_status cal_config_set_workers(cal_config* config, int workers) {
  return guarded([&] {
    require(config, "config");
    if (workers < 0) throw calderon::parameter_error("workers must be non-negative");
    config->config.workers = workers;
  });
}

cal_status cal_config_set_stages(cal_config* config, const char* stages) {
  return guarded([&] {
    require(config, "config");
    require(stages, "stages");
    config->config.stages = calderon::parse_stages(stages);
  });
}

cal_status cal_config_to_json(const cal_config* config, char* buffer, size_t size, size_t* needed) {
  return guarded([&] {
    require(config, "config");
    const std::string s = calderon::to_json(config->config).dump(2);
    if (needed) *needed = s.size() + 1;
    if (buffer) copy_out(s, buffer, size);
  });
}

cal_status cal_config_hash(const cal_config* config, char* buffer, size_t size) {
  return guarded([&] {
    require(config, "config");
    require(buffer, "buffer");
    copy_out(calderon::config_hash(config->config), buffer, size);
  });
}

cal_status cal_config_output_dir(const cal_config* config, char* buffer, size_t size) {
  return guarded([&] {
    require(config, "config");
    require(buffer, "buffer");
    copy_out(config->config.output_dir.string(), buffer, size);
  });
}

cal_status cal_run_forward(const cal_config* config, char* path_out, size_t size) {
  return guarded([&] {
    require(config, "config");
    const auto r = calderon::run_forward(config->config, log_message);
    copy_out(r.path.string(), path_out, size);
  });
}

cal_status cal_run_extend(const cal_config* config, const char* dtn_path, char* path_out, size_t size) {
  return guarded([&] {
    require(config, "config");
    require(dtn_path, "dtn_path");
    const auto r = calderon::run_extend(config->config, dtn_path, log_message);
    copy_out(r.path.string(), path_out, size);
  });
}

cal_status cal_run_reconstruct(const cal_config* config, const char* dtn_path, double* relative_l2) {
  return guarded([&] {
    require(config, "config");
    require(dtn_path, "dtn_path");
    if (relative_l2) *relative_l2 = std::nan("");
    const auto r = calderon::run_reconstruct(config->config, dtn_path, log_message);
    if (relative_l2 && r.metrics) *relative_l2 = r.metrics->relative_l2;
  });
}

cal_status cal_run_verify(const cal_config* config, int* all_passed, char* summary, size_t size) {
  return guarded([&] {
    require(config, "config");
    require(all_passed, "all_passed");
    const auto r = calderon::run_verify(config->config, log_message);
    *all_passed = r.all_passed() ? 1 : 0;
    if (summary) {
      std::string s = r.summary();
      if (size == 0) return;
      if (s.size() + 1 > size) s.resize(size - 1);
      std::memcpy(summary, s.c_str(), s.size() + 1);
    }
  });
}

cal_status cal_dtn_unit(int n_nodes, double radius, int max_mode, cal_dtn** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new cal_dtn{calderon::dtn_unit(calderon::make_disk_geometry(n_nodes, radius), max_mode)};
  });
}

cal_status cal_dtn_load(const char* path, cal_dtn** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    std::ifstream in(path);
    if (!in) throw calderon::io_error(std::string("cannot open ") + path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw calderon::io_error(std::string("malformed JSON: ") + e.what());
    }
    *out = new cal_dtn{calderon::dtn_from_json(j)};
  });
}

void cal_dtn_free(cal_dtn* map) { delete map; }

cal_status cal_dtn_info(const cal_dtn* map, int* n_nodes, double* radius, int* max_mode) {
  return guarded([&] {
    require(map, "map");
    if (n_nodes) *n_nodes = map->map.geometry.n_nodes;
    if (radius) *radius = map->map.radius();
    if (max_mode) *max_mode = map->map.max_mode;
  });
}

cal_status cal_dtn_entry(const cal_dtn* map, int m, int n, double* re, double* im) {
  return guarded([&] {
    require(map, "map");
    require(re, "re");
    require(im, "im");
    const int big_m = map->map.max_mode;
    if (std::abs(m) > big_m || std::abs(n) > big_m) throw calderon::parameter_error("mode index beyond max_mode");
    const auto v = map->map(m, n);
    *re = v.real();
    *im = v.imag();
  });
}

cal_status cal_cgo_trace(const cal_dtn* map, double k_re, double k_im, double* psi11, double* psi21,
                         double* residual) {
  return guarded([&] {
    require(map, "map");
    require(psi11, "psi11");
    require(psi21, "psi21");
    const auto t = calderon::solve_cgo_trace(map->map, map->map.geometry, {k_re, k_im});
    for (Eigen::Index j = 0; j < t.psi11.size(); ++j) {
      psi11[2 * j] = t.psi11(j).real();
      psi11[2 * j + 1] = t.psi11(j).imag();
      psi21[2 * j] = t.psi21(j).real();
      psi21[2 * j + 1] = t.psi21(j).imag();
    }
    if (residual) *residual = t.lsq_residual;
  });
}

cal_status cal_scattering_compute(const cal_dtn* map, int m, double r_k, double h_k, int workers,
                                  cal_scattering** out) {
  return guarded([&] {
    require(map, "map");
    require(out, "out");
    *out = nullptr;
    const calderon::TraceSolver solver(map->map, map->map.geometry);
    const calderon::KGrid grid = calderon::make_k_grid(m, r_k, h_k);
    *out = new cal_scattering{calderon::compute_scattering_grid(solver, grid, workers)};
  });
}

cal_status cal_scattering_dual(const cal_scattering* grid, cal_scattering** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "out");
    *out = nullptr;
    *out = new cal_scattering{calderon::dual_scattering(grid->grid)};
  });
}

void cal_scattering_free(cal_scattering* grid) { delete grid; }

cal_status cal_scattering_info(const cal_scattering* grid, int* side, double* h_k, double* r_k) {
  return guarded([&] {
    require(grid, "grid");
    if (side) *side = grid->grid.grid.side();
    if (h_k) *h_k = grid->grid.grid.h_k;
    if (r_k) *r_k = grid->grid.grid.R_k;
  });
}

cal_status cal_scattering_value(const cal_scattering* grid, int ix, int iy, double* s12, double* s21) {
  return guarded([&] {
    require(grid, "grid");
    const int s = grid->grid.grid.side();
    if (ix < 0 || iy < 0 || ix >= s || iy >= s) throw calderon::parameter_error("grid index out of range");
    if (s12) {
      s12[0] = grid->grid.s12(ix, iy).real();
      s12[1] = grid->grid.s12(ix, iy).imag();
    }
    if (s21) {
      s21[0] = grid->grid.s21(ix, iy).real();
      s21[1] = grid->grid.s21(ix, iy).imag();
    }
  });
}

cal_status cal_reconstruct_point(const cal_scattering* dual, double x, double y, cal_gamma_rule rule,
                                 double* gamma) {
  return guarded([&] {
    require(dual, "dual");
    require(gamma, "gamma");
    calderon::ReconOptions opt;
    if (rule == CAL_RULE_SQUARED_REAL_PART)
      opt.rule = calderon::GammaRule::squared_real_part;
    else if (rule == CAL_RULE_REAL_PART)
      opt.rule = calderon::GammaRule::real_part;
    else
      throw calderon::parameter_error("unknown gamma rule");
    *gamma = calderon::reconstruct_point(calderon::DbarSolver(dual->grid), {x, y}, opt).gamma;
  });
}

}  // extern "C"
