#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calderon/recon.hpp"

namespace calderon {

enum class Stage { forward, traces, scattering, recon, metrics };

const char* to_string(Stage s);
/// Comma-separated stage names; "traces-only" is shorthand for "traces", "all" for every stage.
std::set<Stage> parse_stages(const std::string& list);

struct ExtendSettings {
  double outer_radius = 1.5;
  nlohmann::json annulus = {{"type", "unit"}};  // conductivity on the added annulus
  ExtensionOptions options;
};

struct PipelineConfig {
  std::optional<nlohmann::json> phantom;  // conductivity spec; absent when the DtN map comes from elsewhere
  int n_nodes = 64;
  double radius = 1.0;
  int max_mode = 16;
  FemOptions fem{64, true};
  int k_m = 6;
  double R_k = 4.0;
  double h_k = 0.0;  // 0: automatic
  RegularizationConfig regularization;
  SolverConfig solver;
  int z_grid = 16;
  GammaRule rule = GammaRule::squared_real_part;
  double gamma_min_clamp = 1e-3;
  ExtendSettings extend;
  int workers = 0;
  std::filesystem::path output_dir = "calderon_out";
  std::set<Stage> stages{Stage::forward, Stage::traces, Stage::scattering, Stage::recon, Stage::metrics};
};

/// Validates every field; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& c);

/// FNV-1a (64 bit, hex) of the canonical JSON of the numerical settings.
/// Output directory, worker count and stage selection do not enter the hash.
std::string config_hash(const PipelineConfig& c);

using ProgressSink = std::function<void(const std::string&)>;

struct ForwardResult {
  DtNMap map;
  std::filesystem::path path;
};

/// Writes <out>/dtn.json.
ForwardResult run_forward(const PipelineConfig& c, const ProgressSink& log = {});

struct ExtendResult {
  DtNMap map;
  std::filesystem::path path;
  std::optional<double> path_agreement;  // max |analytic - fem| over entries, when both paths apply
};

/// Writes <out>/dtn_extended.json and <out>/extend_report.json.
ExtendResult run_extend(const PipelineConfig& c, const std::filesystem::path& dtn_path, const ProgressSink& log = {});

struct ReconstructResult {
  std::vector<std::string> written;
  std::optional<ReconImage> image;
  std::optional<Metrics> metrics;
};

/// Steps traces -> scattering -> dual -> dbar -> gamma, persisting each
/// intermediate under <out>. Deselected stages are loaded from disk when a
/// later selected stage needs them; their config hash must match.
ReconstructResult run_reconstruct(const PipelineConfig& c, const std::filesystem::path& dtn_path,
                                  const ProgressSink& log = {});

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::string preferred_rule;  // rule meeting the 10 % L2 bound, or "none" / "both"
  bool all_passed() const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

/// Runs the invariant suites on the configured phantom and writes <out>/verify.json.
VerifyReport run_verify(const PipelineConfig& c, const ProgressSink& log = {});

}  // namespace calderon
