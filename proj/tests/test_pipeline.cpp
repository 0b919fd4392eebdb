#include <gtest/gtest.h>

#include <filesystem>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nullforge/errors.hpp"
#include "nullforge/pipeline.hpp"

using namespace nullforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nullforge_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json rh3_config() {
  return json::parse(R"({
    "experiment": "rh3", "seed": 5,
    "immersion": {"preset": "spinor-disc"},
    "params": {"eps": 0.05},
    "mesh": {"rings": 4, "angles": 16}
  })");
}

std::string config_error(const json& cfg) {
  try {
    run_pipeline(cfg, {scratch("err").string()});
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Pipeline, ConfigErrorsNameTheField) {
  json c = rh3_config();
  c["params"]["rho0"] = 1.5;
  EXPECT_NE(config_error(c).find("params.rho0"), std::string::npos);
  c = rh3_config();
  c["params"]["bump"] = {{"half_width", -1.0}};
  EXPECT_NE(config_error(c).find("params.bump.half_width"), std::string::npos);
  c = rh3_config();
  c["experiment"] = "nope";
  EXPECT_NE(config_error(c).find("experiment"), std::string::npos);
  c = rh3_config();
  c["immersion"] = {{"preset", "catenoid-annulus"}};
  EXPECT_NE(config_error(c).find("disc immersion"), std::string::npos);
  c = rh3_config();
  c["params"]["sigma"] = {1, 0, 0};
  EXPECT_NE(config_error(c).find("params.sigma"), std::string::npos);
  c = rh3_config();
  c["mesh"]["angles"] = "many";
  EXPECT_NE(config_error(c).find("mesh.angles"), std::string::npos);
}

TEST(Pipeline, Presets) {
  const auto plane = preset_immersion({{"preset", "plane"}, {"scale", 0.5}, {"dim", 4}});
  EXPECT_EQ(plane.dim(), 4u);
  EXPECT_LT(hopf_residual(plane), 1e-14);
  const auto cat = preset_immersion({{"preset", "catenoid-annulus"}});
  EXPECT_EQ(cat.domain, DomainKind::Annulus);
  EXPECT_LT(hopf_residual(cat), 1e-12);
}

TEST(Pipeline, ZeroSizeRunKeepsTheSurface) {
  json c = rh3_config();
  c["params"]["bump"] = {{"rmax", 0.0}};
  const auto dir = scratch("zero");
  const auto res = run_pipeline(c, {dir.string()});
  EXPECT_EQ(res.exit_code, 0) << res.first_failed;
  const auto& r = res.report["results"];
  EXPECT_LT(r["s1"].get<double>(), 0.05);
  EXPECT_LT(r["s3"].get<double>(), 1e-6);
  EXPECT_NEAR(r["s2"].get<double>(), std::sqrt(2.0) * (1.0 - r["rho_prime"].get<double>()), 1e-12);
  EXPECT_TRUE(verify_report(res.report).ok);
}

TEST(Pipeline, DeterministicArtifacts) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run_pipeline(rh3_config(), {a.string()});
  const auto rb = run_pipeline(rh3_config(), {b.string()});
  ASSERT_EQ(ra.artifacts, rb.artifacts);
  for (const auto& name : ra.artifacts) EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
}

TEST(Pipeline, ObjAndCoords) {
  json c = json::parse(R"({
    "experiment": "rhn", "seed": 2,
    "immersion": {"preset": "plane", "dim": 4},
    "mesh": {"rings": 4, "angles": 16}
  })");
  const auto dir = scratch("rhn");
  const auto res = run_pipeline(c, {dir.string()});
  EXPECT_EQ(res.exit_code, 0) << res.first_failed;
  std::ifstream obj(dir / "surface_final.obj");
  int verts = 0, faces = 0;
  for (std::string line; std::getline(obj, line);) {
    verts += line.rfind("v ", 0) == 0;
    faces += line.rfind("f ", 0) == 0;
  }
  EXPECT_EQ(verts, 1 + 4 * 16);
  EXPECT_EQ(faces, 16 * (2 * 4 - 1));
  std::ifstream coords(dir / "coords.csv");
  std::string header;
  std::getline(coords, header);
  EXPECT_EQ(header, "vertex,x1,x2,x3,x4");
}

TEST(Pipeline, VerifyCatchesTampering) {
  const auto res = run_pipeline(rh3_config(), {scratch("tamper").string()});
  json r = res.report;
  ASSERT_TRUE(verify_report(r).ok);
  r["checks"][0]["value"] = 1.0;
  EXPECT_FALSE(verify_report(r).ok);
  r = res.report;
  r["first_failed"] = "s2";
  EXPECT_FALSE(verify_report(r).ok);
}

TEST(Pipeline, SeedOverrideChangesOnlyTheSeed) {
  PipelineOptions o{scratch("seed").string()};
  o.seed = 99;
  const auto res = run_pipeline(rh3_config(), o);
  EXPECT_EQ(res.report["seed"].get<std::uint64_t>(), 99u);
  EXPECT_EQ(res.exit_code, 0);
}
