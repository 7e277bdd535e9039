#include <filesystem>
#include <fstream>
#include <iterator>

#include "calderon/error.hpp"
#include "calderon/pipeline.hpp"
#include "doctest.h"

using namespace calderon;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config(const fs::path& out) {
  return {{"phantom", {{"type", "radial-bump"}, {"peak", 1.5}, {"support", 0.8}}},
          {"geometry", {{"n_nodes", 32}, {"radius", 1.0}}},
          {"max_mode", 8},
          {"fem", {{"resolution", 24}, {"reference_correction", true}}},
          {"k_grid", {{"m", 4}, {"R_k", 3.0}}},
          {"recon", {{"z_grid", 6}}},
          {"output_dir", out.string()}};
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("calderon_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::parameter;
}

}  // namespace

TEST_CASE("stage lists") {
  CHECK(parse_stages("all").size() == 5);
  CHECK(parse_stages("traces-only") == std::set<Stage>{Stage::traces});
  CHECK(parse_stages("scattering,dbar") == std::set<Stage>{Stage::scattering, Stage::recon});
  CHECK_THROWS_AS(parse_stages("warp"), Error);
  CHECK_THROWS_AS(parse_stages(""), Error);
}

TEST_CASE("configuration validation") {
  const auto base = small_config("x");
  CHECK_NOTHROW(pipeline_config_from_json(base));
  const auto bad = [&](const std::function<void(nlohmann::json&)>& edit) {
    auto j = base;
    edit(j);
    return kind_of([&] { pipeline_config_from_json(j); });
  };
  CHECK(bad([](auto& j) { j["unknown"] = 1; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["geometry"]["typo"] = 1; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["geometry"]["n_nodes"] = 30; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["max_mode"] = 40; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["k_grid"]["m"] = 2; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["k_grid"]["R_k"] = "four"; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["recon"]["rule"] = "cube"; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["solver"]["tol"] = 0.0; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["phantom"]["type"] = "hexagon"; }) == ErrorKind::parameter);
  CHECK(bad([](auto& j) { j["workers"] = -2; }) == ErrorKind::parameter);
  CHECK(kind_of([] { load_pipeline_config("/nonexistent/config.json"); }) == ErrorKind::parameter);
}

TEST_CASE("config hash ignores output location, workers and stages") {
  auto a = pipeline_config_from_json(small_config("a"));
  auto b = pipeline_config_from_json(small_config("b"));
  b.workers = 3;
  b.stages = parse_stages("traces");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.n_nodes = 64;
  CHECK(config_hash(a) != config_hash(b));
  const auto round = pipeline_config_from_json(to_json(a));
  CHECK(config_hash(round) == config_hash(a));
}

TEST_CASE("staged runs resume from persisted artifacts and are deterministic") {
  const fs::path dir = fresh_dir("pipeline");
  auto c = pipeline_config_from_json(small_config(dir));
  std::vector<std::string> messages;
  const auto fwd = run_forward(c, [&](const std::string& m) { messages.push_back(m); });
  CHECK(fs::exists(dir / "dtn.json"));
  CHECK_FALSE(messages.empty());

  auto first = c;
  first.stages = parse_stages("traces-only");
  const auto r1 = run_reconstruct(first, fwd.path);
  CHECK(fs::exists(dir / "traces.json"));
  CHECK_FALSE(fs::exists(dir / "scattering.bin"));
  CHECK_FALSE(r1.image.has_value());

  auto rest = c;
  rest.stages = parse_stages("scattering,recon,metrics");
  const auto r2 = run_reconstruct(rest, fwd.path);
  REQUIRE(r2.metrics.has_value());
  CHECK(fs::exists(dir / "recon.csv"));
  CHECK(fs::exists(dir / "metrics.json"));
  CHECK(fs::exists(dir / "scattering_dual.bin"));
  CHECK(r2.metrics->failed_nodes == 0);
  const std::string scattering = slurp(dir / "scattering.bin");
  const std::string recon = slurp(dir / "recon.bin");

  // metrics only, from the stored image
  auto metrics_only = c;
  metrics_only.stages = parse_stages("metrics");
  const auto r3 = run_reconstruct(metrics_only, fwd.path);
  REQUIRE(r3.metrics.has_value());
  CHECK(r3.metrics->relative_l2 == r2.metrics->relative_l2);

  // a second full run with a different worker count reproduces every byte
  const fs::path dir2 = fresh_dir("pipeline_again");
  auto again = c;
  again.output_dir = dir2;
  again.workers = 1;
  const auto r4 = run_reconstruct(again, dir2 / "dtn.json");
  CHECK(slurp(dir2 / "scattering.bin") == scattering);
  CHECK(slurp(dir2 / "recon.bin") == recon);
  CHECK(slurp(dir2 / "dtn.json") == slurp(dir / "dtn.json"));
  REQUIRE(r4.metrics.has_value());

  // artifacts from different settings are refused
  auto other = rest;
  other.solver.tol = 1e-9;
  CHECK(kind_of([&] { run_reconstruct(other, fwd.path); }) == ErrorKind::parameter);
  try {
    run_reconstruct(other, fwd.path);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("[stage") != std::string::npos);
  }
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("missing or malformed DtN input") {
  const fs::path dir = fresh_dir("pipeline_io");
  auto c = pipeline_config_from_json(small_config(dir));
  c.stages = parse_stages("traces");
  CHECK(kind_of([&] { run_reconstruct(c, dir / "absent.json"); }) == ErrorKind::io);
  fs::create_directories(dir);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(kind_of([&] { run_reconstruct(c, dir / "broken.json"); }) == ErrorKind::io);
  fs::remove_all(dir);
}

TEST_CASE("extend writes the larger-disk map") {
  const fs::path dir = fresh_dir("pipeline_extend");
  auto c = pipeline_config_from_json(small_config(dir));
  const auto fwd = run_forward(c);
  const auto ext = run_extend(c, fwd.path);
  CHECK(fs::exists(dir / "dtn_extended.json"));
  CHECK(fs::exists(dir / "extend_report.json"));
  CHECK(ext.map.radius() == 1.5);
  REQUIRE(ext.path_agreement.has_value());
  CHECK(*ext.path_agreement < 1e-3);
  fs::remove_all(dir);
}
