#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "umfloc/field.hpp"
#include "umfloc/grid.hpp"
#include "umfloc/rotation.hpp"

namespace umfloc {

enum class Scheme {
  Naive,
  WclQuarter,
  WclHalf,
  Kernel,
  ProposedSingle,
  ProposedTwoSource,
  SimpleUmf,
  CompleteUmf,
  RotatedUmf,
};

const char* to_string(Scheme scheme) noexcept;
Scheme scheme_from_string(const std::string& name);
const std::vector<Scheme>& all_schemes();

/// Field and emitter layout of one experiment.
struct Scenario {
  FieldKind field = FieldKind::Gaussian;
  double gamma = 20.0;
  double width = 1.0;
  UnderwaterParams underwater{};
  int sources = 1;
  /// Fixed emitter positions; random placement per trial when empty.
  Points positions;
  /// Per-source powers; equal shares of P = 1 when empty.
  std::vector<double> powers;
  double placement_radius = 0.25;  // fraction of L
  double min_separation = 0.1;     // fraction of L
  /// sigma_n^2 / P in dB, P the total power; noiseless when unset.
  std::optional<double> noise_db;
  Placement placement = Placement::UniformRandom;

  void validate() const;
  FieldModel model() const;
  double noise_variance() const;
};

/// Knobs shared by the proposed pipelines.
struct PipelineOptions {
  GridPolicy grid_policy = GridPolicy::Aggressive;
  LogBase log_base = LogBase::Natural;
  int umf_restarts = 5;
  int umf_iterations = 200;
  /// Complete before factorizing; unset means "on when the scenario is noisy".
  std::optional<bool> denoise;
  double epsilon_scale = 0.25;
  RotationOptions rotation{};
};

struct ExperimentSpec {
  std::string name = "experiment";
  Scenario scenario{};
  std::vector<std::size_t> sample_counts;
  int trials = 50;
  std::vector<Scheme> schemes;
  PipelineOptions pipeline{};
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir;

  void validate() const;
};

struct MetricRow {
  Scheme scheme = Scheme::Naive;
  std::size_t samples = 0;
  int trial = 0;
  std::vector<double> squared_errors;  // per true source after matching
  double rmse = 0.0;                   // NaN when the trial failed
  double wall_ms = 0.0;
  bool ok = true;
  std::string message;
};

struct SummaryRow {
  Scheme scheme = Scheme::Naive;
  std::size_t samples = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double rms = 0.0;  // sqrt of the mean squared RMSE
};

/// 64-bit mix (SplitMix64 finalizer).
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t trial_seed(std::uint64_t master, std::size_t samples, int trial);

/// Random emitters in the placement disc with the minimum pairwise separation.
SourceConfig place_sources(const Scenario& scenario, std::uint64_t seed);

/// Runs one localization scheme on a measurement set; `sources` is K.
Points run_scheme(Scheme scheme, const MeasurementSet& ms, const Scenario& scenario, const PipelineOptions& options,
                  std::uint64_t seed);

/// Completion tolerance used by the pipelines for a grid.
double pipeline_epsilon(const Scenario& scenario, const ObservationGrid& grid, const PipelineOptions& options);

/// Minimum-cost assignment of estimates to truth (exhaustive, K <= 8).
/// Returns matched RMSE and fills the per-truth squared errors.
double match_and_score(const Points& estimates, const Points& truth, std::vector<double>* squared_errors = nullptr);

std::vector<MetricRow> run_experiment(const ExperimentSpec& spec);

std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows);

/// Least-squares slope of log10(y) on log10(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
/// Slope of log10(median RMSE) versus log10(M) for one scheme over M in [lo, hi].
double fit_loglog_slope(const std::vector<MetricRow>& rows, Scheme scheme, std::size_t lo, std::size_t hi);

/// Median RMSE of one scheme at one M (NaN when no trial succeeded).
double median_rmse(const std::vector<MetricRow>& rows, Scheme scheme, std::size_t samples);

void write_metrics(const std::vector<MetricRow>& rows, const std::string& path);
void write_summary(const std::vector<SummaryRow>& rows, const std::string& path);

}  // namespace umfloc
