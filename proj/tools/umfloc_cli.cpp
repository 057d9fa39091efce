#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>

#include "umfloc/bench.hpp"
#include "umfloc/config.hpp"
#include "umfloc/csv.hpp"
#include "umfloc/error.hpp"
#include "umfloc/grid.hpp"
#include "umfloc/rotation.hpp"

using namespace umfloc;

namespace {

struct ScenarioFlags {
  std::string config;
  std::string field = "gaussian";
  double gamma = 20.0;
  double width = 1.0;
  int sources = 1;
  std::optional<double> noise_db;

  void add(CLI::App* app) {
    app->add_option("--config", config, "YAML file with a scenario block (overrides the flags below)");
    app->add_option("--field", field, "gaussian | laplacian | underwater");
    app->add_option("--gamma", gamma, "field decay rate");
    app->add_option("--width", width, "area width L in km");
    app->add_option("--sources", sources, "number of sources K");
    app->add_option("--noise-db", noise_db, "noise variance relative to total power, dB");
  }

  Scenario scenario() const {
    if (!config.empty()) return parse_scenario(read_text_file(config));
    Scenario s;
    s.field = field_kind_from_string(field);
    s.gamma = gamma;
    s.width = width;
    s.sources = sources;
    s.noise_db = noise_db;
    s.validate();
    return s;
  }
};

void write_points(std::ostream& out, const Points& pts) {
  out << "x_km,y_km\n" << std::setprecision(17);
  for (const auto& p : pts) out << p.x() << ',' << p.y() << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free source localization from sparse energy samples"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads for bench")->capture_default_str();
  app.add_option("--out", out, "output file (simulate, localize, rotate-profile) or directory (bench)");

  auto* sim = app.add_subcommand("simulate", "draw a measurement set");
  ScenarioFlags sim_flags;
  sim_flags.add(sim);
  std::size_t count = 100;
  std::string placement = "uniform";
  sim->add_option("-M,--samples", count, "number of sensors")->capture_default_str();
  sim->add_option("--placement", placement, "uniform | jittered");

  auto* loc = app.add_subcommand("localize", "estimate source positions from a measurement CSV");
  ScenarioFlags loc_flags;
  loc_flags.add(loc);
  std::string input;
  std::string scheme = "proposed-single";
  std::string policy = "aggressive";
  loc->add_option("--in", input, "measurement CSV (x_km,y_km,energy)")->required();
  loc->add_option("--scheme", scheme, "localization scheme")->capture_default_str();
  loc->add_option("--grid", policy, "conservative | aggressive | half-fill")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "run a Monte-Carlo experiment");
  std::string spec_path;
  std::vector<std::string> scheme_filter;
  bench->add_option("--config", spec_path, "experiment YAML")->required();
  bench->add_option("--scheme", scheme_filter, "restrict to these schemes");

  auto* rot = app.add_subcommand("rotate-profile", "sample rho(theta) over [0, 90) degrees");
  ScenarioFlags rot_flags;
  rot_flags.add(rot);
  std::string rot_input;
  int size = 0;
  double step_deg = 1.0;
  rot->add_option("--in", rot_input, "measurement CSV")->required();
  rot->add_option("-N,--size", size, "grid size (default: aggressive rule)");
  rot->add_option("--step", step_deg, "angle step in degrees")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << nlohmann::json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (*sim) {
      Scenario s;
      if (!sim_flags.config.empty()) {
        const CampaignConfig c = parse_campaign(read_text_file(sim_flags.config));
        s = c.scenario;
        if (!sim->count("--samples")) count = c.samples;
        if (!app.count("--seed")) seed = c.seed;
      } else {
        s = sim_flags.scenario();
      }
      if (placement == "jittered") s.placement = Placement::GridJittered;
      else require(placement == "uniform", ErrorKind::Config, "unknown placement '" + placement + "'");
      const std::uint64_t trial = trial_seed(seed, count, 0);
      const SourceConfig sources = place_sources(s, mix_seed(trial ^ 1));
      SamplingOptions opts;
      opts.placement = s.placement;
      opts.noise_variance = s.noise_variance();
      const MeasurementSet ms = sample_measurements(sources, s.model(), count, mix_seed(trial ^ 2), opts);
      if (out.empty()) {
        write_measurements(std::cout, ms);
      } else {
        write_measurements(out, ms);
        auto truth = open_out(out + ".sources.csv");
        write_points(truth, sources.positions);
      }
    } else if (*loc) {
      const Scenario s = loc_flags.scenario();
      const MeasurementSet ms = read_measurements(input);
      PipelineOptions opts;
      opts.grid_policy = grid_policy_from_string(policy);
      const Points est = run_scheme(scheme_from_string(scheme), ms, s, opts, seed);
      if (out.empty()) {
        write_points(std::cout, est);
      } else {
        auto f = open_out(out);
        write_points(f, est);
      }
    } else if (*bench) {
      ExperimentSpec spec = load_experiment_spec(spec_path);
      if (!scheme_filter.empty()) {
        spec.schemes.clear();
        for (const auto& name : scheme_filter) spec.schemes.push_back(scheme_from_string(name));
      }
      if (app.count("--seed")) spec.seed = seed;
      if (app.count("--threads")) spec.threads = threads;
      if (!out.empty()) spec.output_dir = out;
      if (spec.output_dir.empty()) spec.output_dir = ".";
      std::filesystem::create_directories(spec.output_dir);
      const auto rows = run_experiment(spec);
      const auto summary = summarize(rows);
      const std::string dir = spec.output_dir + "/";
      write_metrics(rows, dir + spec.name + "_metrics.csv");
      write_summary(summary, dir + spec.name + "_summary.csv");
      for (const auto& r : summary)
        std::cout << to_string(r.scheme) << " M=" << r.samples << " median=" << r.median << " failures=" << r.failures
                  << '\n';
    } else if (*rot) {
      const Scenario s = rot_flags.scenario();
      const MeasurementSet ms = read_measurements(rot_input);
      const int N = size > 0 ? size : std::max(2, choose_grid_size(ms.size(), GridPolicy::Aggressive));
      require(step_deg > 0.0 && step_deg < 90.0, ErrorKind::Config, "step must lie in (0, 90)");
      PipelineOptions opts;
      std::ofstream file;
      if (!out.empty()) file = open_out(out);
      std::ostream& os = out.empty() ? std::cout : file;
      os << "theta_deg,rho\n" << std::setprecision(17);
      for (double deg = 0.0; deg < 90.0 - 1e-9; deg += step_deg) {
        const ObservationGrid g = build_grid(ms, N, s.width, deg2rad(deg));
        CompletionConfig cfg;
        cfg.max_rank = s.sources + 2;
        cfg.epsilon = pipeline_epsilon(s, g, opts);
        os << deg << ',' << spectral_concentration(complete(g, cfg).values) << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
