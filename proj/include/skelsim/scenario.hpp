#ifndef SKELSIM_SCENARIO_HPP
#define SKELSIM_SCENARIO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "skelsim/managers.hpp"
#include "skelsim/sim.hpp"

#include <nlohmann/json_fwd.hpp>

namespace skelsim {

/// A complete simulation input. Loaded from JSON with strict validation:
/// unknown keys are rejected.
struct Scenario {
  SkeletonExpr skeleton = SkeletonExpr::seq("s", 1.0);
  ContractList contracts;
  std::vector<Resource> pool;
  std::vector<WorkloadPhase> workload;
  CoordinationMode mode = CoordinationMode::CM;
  SimConfig sim;
  RuleKnobs knobs;
  int default_degree = 4;

  static Scenario from_json(const nlohmann::json& j);
  static Scenario from_string(const std::string& text);
  static Scenario load(const std::filesystem::path& path);
};

}  // namespace skelsim

#endif
