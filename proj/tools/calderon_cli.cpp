#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "calderon/calderon.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code(cal_status s) {
  if (s == CAL_OK) return 0;
  return (s == CAL_ERR_NUMERICAL || s == CAL_ERR_INTERNAL) ? kExitNumerical : kExitConfig;
}

int fail(cal_status s) {
  std::fprintf(stderr, "calderon: %s: %s\n", cal_status_name(s), cal_last_error());
  return exit_code(s);
}

void log_to_stderr(const char* msg, void*) { std::fprintf(stderr, "[calderon] %s\n", msg); }

struct Common {
  std::string config;
  std::string out;
  int workers = -1;
  std::string stages;
  std::string dtn;
};

void add_common(CLI::App* cmd, Common& c, bool with_dtn) {
  cmd->add_option("--config", c.config, "pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides the configuration)");
  cmd->add_option("--workers", c.workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  cmd->add_option("--stages", c.stages, "comma-separated stages: forward,traces,scattering,recon,metrics | all | traces-only");
  if (with_dtn) cmd->add_option("--dtn", c.dtn, "DtN map file (default <out>/dtn.json)");
}

cal_status open_config(const Common& c, cal_config** cfg) {
  cal_status s = cal_config_load(c.config.c_str(), cfg);
  if (s != CAL_OK) return s;
  if (!c.out.empty() && (s = cal_config_set_output_dir(*cfg, c.out.c_str())) != CAL_OK) return s;
  if (c.workers >= 0 && (s = cal_config_set_workers(*cfg, c.workers)) != CAL_OK) return s;
  if (!c.stages.empty() && (s = cal_config_set_stages(*cfg, c.stages.c_str())) != CAL_OK) return s;
  return CAL_OK;
}

std::string dtn_path(const Common& c, const cal_config* cfg) {
  if (!c.dtn.empty()) return c.dtn;
  std::vector<char> buf(4096);
  if (cal_config_output_dir(cfg, buf.data(), buf.size()) != CAL_OK) return "dtn.json";
  return std::string(buf.data()) + "/dtn.json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D-bar reconstruction of planar conductivities from Dirichlet-to-Neumann data"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress messages");
  app.set_version_flag("--version", std::string(cal_version()));

  Common forward, extend, reconstruct, verify;
  auto* f = app.add_subcommand("forward", "synthesize the DtN map of the configured phantom");
  add_common(f, forward, false);
  auto* e = app.add_subcommand("extend", "extend a DtN map to a larger disk");
  add_common(e, extend, true);
  auto* r = app.add_subcommand("reconstruct", "traces, scattering, dbar solves and conductivity image");
  add_common(r, reconstruct, true);
  auto* v = app.add_subcommand("verify", "run the invariant suites on the configured phantom");
  add_common(v, verify, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }
  if (!quiet) cal_set_log_callback(log_to_stderr, nullptr);

  cal_config* cfg = nullptr;
  cal_status s = CAL_OK;
  int code = 0;
  if (f->parsed()) {
    if ((s = open_config(forward, &cfg)) == CAL_OK) {
      char path[4096];
      if ((s = cal_run_forward(cfg, path, sizeof path)) == CAL_OK) std::printf("%s\n", path);
    }
  } else if (e->parsed()) {
    if ((s = open_config(extend, &cfg)) == CAL_OK) {
      char path[4096];
      const std::string in = dtn_path(extend, cfg);
      if ((s = cal_run_extend(cfg, in.c_str(), path, sizeof path)) == CAL_OK) std::printf("%s\n", path);
    }
  } else if (r->parsed()) {
    if ((s = open_config(reconstruct, &cfg)) == CAL_OK) {
      double l2 = 0.0;
      const std::string in = dtn_path(reconstruct, cfg);
      if ((s = cal_run_reconstruct(cfg, in.c_str(), &l2)) == CAL_OK && !std::isnan(l2))
        std::printf("relative_l2 %.6g\n", l2);
    }
  } else if (v->parsed()) {
    if ((s = open_config(verify, &cfg)) == CAL_OK) {
      int passed = 0;
      std::vector<char> summary(16384);
      if ((s = cal_run_verify(cfg, &passed, summary.data(), summary.size())) == CAL_OK) {
        std::fputs(summary.data(), stdout);
        if (!passed) code = kExitNumerical;
      }
    }
  }
  if (s != CAL_OK) code = fail(s);
  cal_config_free(cfg);
  return code;
}
