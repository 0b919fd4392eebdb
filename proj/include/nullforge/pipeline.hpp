#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nullforge/weierstrass.hpp"

namespace nullforge {

struct PipelineOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::ostream* log = nullptr;        // progress lines when set
};

struct PipelineResult {
  int exit_code = 0;  // 0 all checks pass, 1 a check failed
  std::string first_failed;
  nlohmann::json report;
  std::vector<std::string> artifacts;  // file names inside out_dir
};

// Throws ConfigError naming the offending field.
PipelineResult run_pipeline(const nlohmann::json& config, const PipelineOptions& opt = {});

// Named immersions: plane, spinor-disc, catenoid-annulus.
ImmersionDisc preset_immersion(const nlohmann::json& spec);

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> failures;
};

// Recomputes every stored comparison and the trace-derived checks.
VerifyResult verify_report(const nlohmann::json& report);

}  // namespace nullforge
