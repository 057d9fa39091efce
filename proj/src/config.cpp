#include "umfloc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

#include "umfloc/error.hpp"

namespace umfloc {

namespace {

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  require(node.IsMap(), ErrorKind::Config, where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    require(allowed.count(key) > 0, ErrorKind::Config, where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const YAML::Node& node, const char* key, T fallback) {
  if (!node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorKind::Config, std::string("config: bad value for '") + key + "'");
  }
}

Scenario scenario_from(const YAML::Node& n) {
  check_keys(n,
             {"field", "gamma", "width", "sources", "positions", "powers", "placement_radius", "min_separation",
              "noise_db", "placement", "underwater"},
             "scenario");
  Scenario s;
  s.field = field_kind_from_string(get<std::string>(n, "field", "gaussian"));
  s.gamma = get(n, "gamma", s.gamma);
  s.width = get(n, "width", s.width);
  s.sources = get(n, "sources", s.sources);
  s.placement_radius = get(n, "placement_radius", s.placement_radius);
  s.min_separation = get(n, "min_separation", s.min_separation);
  if (n["noise_db"] && !n["noise_db"].IsNull()) s.noise_db = get(n, "noise_db", 0.0);
  const auto placement = get<std::string>(n, "placement", "uniform");
  if (placement == "uniform") {
    s.placement = Placement::UniformRandom;
  } else if (placement == "jittered") {
    s.placement = Placement::GridJittered;
  } else {
    fail(ErrorKind::Config, "scenario: unknown placement '" + placement + "'");
  }
  if (n["positions"]) {
    for (const auto& p : n["positions"]) {
      require(p.IsSequence() && p.size() == 2, ErrorKind::Config, "scenario: positions must be [x, y] pairs");
      s.positions.emplace_back(p[0].as<double>(), p[1].as<double>());
    }
    if (!n["sources"]) s.sources = static_cast<int>(s.positions.size());
  }
  if (n["powers"]) s.powers = get(n, "powers", std::vector<double>{});
  if (const auto u = n["underwater"]) {
    check_keys(u, {"carrier_khz", "path_count", "mean_interarrival_ms", "decay_per_s", "window_s", "fading"},
               "scenario.underwater");
    s.underwater.carrier_khz = get(u, "carrier_khz", s.underwater.carrier_khz);
    s.underwater.path_count = get(u, "path_count", s.underwater.path_count);
    s.underwater.mean_interarrival_ms = get(u, "mean_interarrival_ms", s.underwater.mean_interarrival_ms);
    s.underwater.decay_per_s = get(u, "decay_per_s", s.underwater.decay_per_s);
    s.underwater.window_s = get(u, "window_s", s.underwater.window_s);
    s.underwater.fading = get(u, "fading", s.underwater.fading);
  }
  s.validate();
  return s;
}

YAML::Node parse_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::Config, std::string("config: ") + e.what());
  }
}

}  // namespace

FieldKind field_kind_from_string(const std::string& name) {
  if (name == "gaussian") return FieldKind::Gaussian;
  if (name == "laplacian") return FieldKind::Laplacian;
  if (name == "underwater") return FieldKind::UnderwaterAcoustic;
  fail(ErrorKind::Config, "unknown field '" + name + "'");
}

GridPolicy grid_policy_from_string(const std::string& name) {
  if (name == "conservative") return GridPolicy::Conservative;
  if (name == "aggressive") return GridPolicy::Aggressive;
  if (name == "half-fill") return GridPolicy::HalfFill;
  fail(ErrorKind::Config, "unknown grid policy '" + name + "'");
}

Scenario parse_scenario(const std::string& yaml) {
  const YAML::Node root = parse_yaml(yaml);
  if (root.IsMap() && root["scenario"]) return scenario_from(root["scenario"]);
  return scenario_from(root);
}

CampaignConfig parse_campaign(const std::string& yaml) {
  const YAML::Node root = parse_yaml(yaml);
  check_keys(root, {"scenario", "samples", "seed"}, "campaign");
  require(static_cast<bool>(root["scenario"]), ErrorKind::Config, "campaign: missing 'scenario'");
  CampaignConfig c;
  c.scenario = scenario_from(root["scenario"]);
  c.samples = get(root, "samples", c.samples);
  c.seed = get(root, "seed", c.seed);
  require(c.samples >= 1, ErrorKind::Config, "campaign: samples must be >= 1");
  return c;
}

ExperimentSpec parse_experiment_spec(const std::string& yaml) {
  const YAML::Node root = parse_yaml(yaml);
  check_keys(root, {"name", "scenario", "sample_counts", "trials", "schemes", "pipeline", "seed", "threads", "output_dir"},
             "experiment");
  ExperimentSpec spec;
  spec.name = get<std::string>(root, "name", spec.name);
  require(static_cast<bool>(root["scenario"]), ErrorKind::Config, "experiment: missing 'scenario'");
  spec.scenario = scenario_from(root["scenario"]);
  spec.sample_counts = get(root, "sample_counts", std::vector<std::size_t>{});
  spec.trials = get(root, "trials", spec.trials);
  for (const auto& name : get(root, "schemes", std::vector<std::string>{})) spec.schemes.push_back(scheme_from_string(name));
  spec.seed = get(root, "seed", spec.seed);
  spec.threads = get(root, "threads", spec.threads);
  spec.output_dir = get<std::string>(root, "output_dir", "");
  if (const auto p = root["pipeline"]) {
    check_keys(p, {"grid", "log_base", "umf_restarts", "umf_iterations", "denoise", "epsilon_scale"}, "pipeline");
    spec.pipeline.grid_policy = grid_policy_from_string(get<std::string>(p, "grid", "aggressive"));
    const auto base = get<std::string>(p, "log_base", "natural");
    require(base == "natural" || base == "10", ErrorKind::Config, "pipeline: log_base must be 'natural' or '10'");
    spec.pipeline.log_base = base == "10" ? LogBase::Ten : LogBase::Natural;
    spec.pipeline.umf_restarts = get(p, "umf_restarts", spec.pipeline.umf_restarts);
    spec.pipeline.umf_iterations = get(p, "umf_iterations", spec.pipeline.umf_iterations);
    if (p["denoise"]) {
      const auto d = p["denoise"].as<std::string>();
      if (d == "true") spec.pipeline.denoise = true;
      else if (d == "false") spec.pipeline.denoise = false;
      else require(d == "auto", ErrorKind::Config, "pipeline: denoise must be true, false or auto");
    }
    spec.pipeline.epsilon_scale = get(p, "epsilon_scale", spec.pipeline.epsilon_scale);
  }
  spec.validate();
  return spec;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec load_experiment_spec(const std::string& path) { return parse_experiment_spec(read_text_file(path)); }

}  // namespace umfloc
