#pragma once

#include <string>

#include "umfloc/bench.hpp"

namespace umfloc {

FieldKind field_kind_from_string(const std::string& name);
GridPolicy grid_policy_from_string(const std::string& name);

/// Experiment spec from YAML text. Unknown keys are rejected.
ExperimentSpec parse_experiment_spec(const std::string& yaml);
ExperimentSpec load_experiment_spec(const std::string& path);

/// One simulated campaign: scenario, sensor count and seed.
struct CampaignConfig {
  Scenario scenario{};
  std::size_t samples = 100;
  std::uint64_t seed = 1;
};
CampaignConfig parse_campaign(const std::string& yaml);

std::string read_text_file(const std::string& path);

/// Scenario block alone (the `scenario:` mapping of an experiment file, or a bare mapping).
Scenario parse_scenario(const std::string& yaml);

}  // namespace umfloc
