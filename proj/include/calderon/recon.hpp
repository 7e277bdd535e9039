#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calderon/conductivity.hpp"
#include "calderon/dbar.hpp"

namespace calderon {

enum class GammaRule {
  squared_real_part,  // gamma = (Re m~+(z,0))^2
  real_part,          // gamma = Re m~+(z,0)
};

const char* to_string(GammaRule rule);
GammaRule gamma_rule_from_string(const std::string& s);

struct ReconOptions {
  GammaRule rule = GammaRule::squared_real_part;
  double gamma_min_clamp = 1e-3;
  SolverConfig solver;
  int workers = 0;
};

struct PointValue {
  double gamma = 1.0;
  cplx m_at_zero{1.0};
  double imag_residual = 0.0;  // |Im| of the complex gamma estimate before taking the real part
  bool clamped = false;
  int iterations = 0;
};

PointValue reconstruct_point(const DbarSolver& solver, cplx z, const ReconOptions& options = {});
inline double reconstruct_point(const ScatteringGrid& s_dual, cplx z, const SolverConfig& solver = {}) {
  ReconOptions o;
  o.solver = solver;
  return reconstruct_point(DbarSolver(s_dual), z, o).gamma;
}

/// Cell-centred n x n grid over [-radius, radius]^2, keeping the nodes with |z| < radius.
struct ZGridSpec {
  int n = 16;
  double radius = 1.0;
};

std::vector<cplx> z_grid_nodes(const ZGridSpec& spec);

struct ReconImage {
  ZGridSpec spec;
  std::vector<cplx> z_nodes;
  std::vector<double> gamma_values;
  std::vector<double> imag_residuals;
  std::vector<cplx> m_at_zero;
  std::vector<bool> clamped;
  std::vector<int> iterations;        // GMRES iterations per node
  std::vector<std::string> failures;  // empty string where the node succeeded
  nlohmann::json metadata;

  std::size_t failed_count() const;
  std::size_t clamped_count() const;
};

/// Parallel over z; per-node failures are recorded, not thrown.
ReconImage reconstruct_grid(const DbarSolver& solver, const ZGridSpec& spec, const ReconOptions& options = {});
inline ReconImage reconstruct_grid(const ScatteringGrid& s_dual, const ZGridSpec& spec,
                                   const ReconOptions& options = {}) {
  return reconstruct_grid(DbarSolver(s_dual), spec, options);
}

/// Same image under a different rule, without re-solving.
ReconImage apply_rule(const ReconImage& image, GammaRule rule, double gamma_min_clamp = 1e-3);

struct Metrics {
  double relative_l2 = 0.0;     // ||rec - truth|| / ||truth|| over the nodes
  double relative_linf = 0.0;   // max |rec - truth| / max |truth|
  double max_imag_ratio = 0.0;  // max imag_residual / gamma
  double symmetry_deviation = 0.0;  // max over rings |z| = const of std / mean
  std::size_t failed_nodes = 0;
  std::size_t clamped_nodes = 0;
};

Metrics compare_fields(const ReconImage& recon, const ConductivityField& truth);
/// Max over rings of equal |z| (to 1e-9) of the ring's standard deviation over its mean.
double rotational_deviation(const ReconImage& recon);

nlohmann::json to_json(const Metrics& m);
/// `comment`, when non-empty, is written first as a '# ' line.
void write_recon_csv(const ReconImage& image, const std::filesystem::path& path, const std::string& comment = {});
void write_recon_binary(const ReconImage& image, const std::filesystem::path& bin_path,
                        const std::filesystem::path& json_path, const nlohmann::json& extra = {});
ReconImage read_recon_binary(const std::filesystem::path& bin_path, const std::filesystem::path& json_path);

}  // namespace calderon
