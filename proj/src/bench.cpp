#include "umfloc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "umfloc/baselines.hpp"
#include "umfloc/error.hpp"
#include "umfloc/lowrank.hpp"
#include "umfloc/peaks.hpp"
#include "umfloc/umf.hpp"

namespace umfloc {

namespace {

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr SchemeName kSchemes[] = {
    {Scheme::Naive, "naive"},
    {Scheme::WclQuarter, "wcl-quarter"},
    {Scheme::WclHalf, "wcl-half"},
    {Scheme::Kernel, "kernel"},
    {Scheme::ProposedSingle, "proposed-single"},
    {Scheme::ProposedTwoSource, "proposed-two-source"},
    {Scheme::SimpleUmf, "simple-umf"},
    {Scheme::CompleteUmf, "complete-umf"},
    {Scheme::RotatedUmf, "rotated-umf"},
};

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

CompletionConfig completion_for(const Scenario& scenario, const ObservationGrid& grid, const PipelineOptions& options) {
  CompletionConfig cfg;
  cfg.max_rank = scenario.sources + 2;
  cfg.epsilon = pipeline_epsilon(scenario, grid, options);
  return cfg;
}

int grid_size(const MeasurementSet& ms, const PipelineOptions& options) {
  return std::max(2, choose_grid_size(ms.size(), options.grid_policy, options.log_base));
}

double epsilon_with(const Scenario& scenario, const ObservationGrid& grid, const PipelineOptions& options,
                    double lipschitz) {
  const double bound = SamplingOptions{}.bound_sigmas * std::sqrt(scenario.noise_variance());
  const double alpha =
      scenario.powers.empty() ? 1.0 : std::accumulate(scenario.powers.begin(), scenario.powers.end(), 0.0);
  return options.epsilon_scale * choose_epsilon(bound, grid.observed(), grid.size, grid.width, alpha, lipschitz);
}

double best_rotation(const MeasurementSet& ms, int size, const Scenario& scenario, const PipelineOptions& options,
                     RotationMode mode) {
  CompletionConfig cfg;
  cfg.max_rank = scenario.sources + 2;
  const double lipschitz = estimate_lipschitz(scenario.model(), scenario.width / size);
  // The tolerance depends on the observed count, which varies with theta.
  const RhoFunction f = [&](double theta) {
    const ObservationGrid g = build_grid(ms, size, scenario.width, theta);
    CompletionConfig c = cfg;
    c.epsilon = epsilon_with(scenario, g, options, lipschitz);
    return spectral_concentration(complete(g, c).values);
  };
  return find_rotation(f, mode, options.rotation).best_theta;
}

Vec2 column_location(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const ObservationGrid& grid) {
  if ((u.array() <= 0.0).all() || (v.array() <= 0.0).all()) return grid.to_world(Vec2::Zero());
  return localize_from_vectors(u, v, grid, "umf").position;
}

Points umf_points(const ObservationGrid& grid, const Scenario& scenario, const PipelineOptions& options,
                  std::uint64_t seed, bool denoise) {
  UmfConfig cfg;
  cfg.factors = scenario.sources;
  cfg.restarts = options.umf_restarts;
  cfg.max_iterations = options.umf_iterations;
  cfg.seed = seed;
  UmfSolution sol;
  if (denoise) {
    const CompletedMatrix c = complete(grid, completion_for(scenario, grid, options));
    const ObservationGrid dense = full_grid(c.X, grid.width, grid.theta);
    sol = solve_umf(dense, cfg);
  } else {
    sol = solve_umf(grid, cfg);
  }
  Points out;
  for (Eigen::Index k = 0; k < sol.U.cols(); ++k) out.push_back(column_location(sol.U.col(k), sol.V.col(k), grid));
  return out;
}

bool denoise_enabled(const Scenario& scenario, const PipelineOptions& options) {
  if (options.denoise) return *options.denoise;
  return scenario.noise_variance() > 0.0;
}

}  // namespace

const char* to_string(Scheme scheme) noexcept {
  for (const auto& s : kSchemes)
    if (s.scheme == scheme) return s.name;
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  for (const auto& s : kSchemes)
    if (name == s.name) return s.scheme;
  fail(ErrorKind::Config, "unknown scheme '" + name + "'");
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> list = [] {
    std::vector<Scheme> v;
    for (const auto& s : kSchemes) v.push_back(s.scheme);
    return v;
  }();
  return list;
}

void Scenario::validate() const {
  require(field != FieldKind::Tabulated, ErrorKind::Config, "scenario: tabulated fields are not configurable here");
  require(width > 0.0, ErrorKind::Config, "scenario: width must be positive");
  require(field == FieldKind::UnderwaterAcoustic || gamma > 0.0, ErrorKind::Config, "scenario: gamma must be positive");
  require(sources >= 1 && sources <= 8, ErrorKind::Config, "scenario: source count must lie in [1, 8]");
  require(positions.empty() || positions.size() == static_cast<std::size_t>(sources), ErrorKind::Config,
          "scenario: fixed positions must match the source count");
  require(placement_radius > 0.0 && placement_radius <= 0.25, ErrorKind::Config,
          "scenario: placement radius must lie in (0, L/4]");
  require(min_separation >= 0.0, ErrorKind::Config, "scenario: minimum separation must be >= 0");
  require(powers.empty() || powers.size() == static_cast<std::size_t>(sources), ErrorKind::Config,
          "scenario: powers must match the source count");
  for (double a : powers) require(a > 0.0, ErrorKind::Config, "scenario: powers must be positive");
  if (field == FieldKind::UnderwaterAcoustic) underwater.validate();
}

FieldModel Scenario::model() const {
  switch (field) {
    case FieldKind::Gaussian:
      return FieldModel::gaussian(gamma, width);
    case FieldKind::Laplacian:
      return FieldModel::laplacian(gamma, width);
    case FieldKind::UnderwaterAcoustic:
      return FieldModel::underwater(underwater, width);
    case FieldKind::Tabulated:
      break;
  }
  fail(ErrorKind::Config, "scenario: unsupported field");
}

double Scenario::noise_variance() const {
  if (!noise_db) return 0.0;
  const double total = powers.empty() ? 1.0 : std::accumulate(powers.begin(), powers.end(), 0.0);
  return std::pow(10.0, *noise_db / 10.0) * total;
}

void ExperimentSpec::validate() const {
  scenario.validate();
  require(trials >= 1, ErrorKind::Config, "experiment: trials must be >= 1");
  require(!sample_counts.empty(), ErrorKind::Config, "experiment: empty M list");
  for (std::size_t i = 0; i < sample_counts.size(); ++i) {
    require(sample_counts[i] >= 4, ErrorKind::Config, "experiment: every M must be >= 4");
    if (i > 0)
      require(sample_counts[i] > sample_counts[i - 1], ErrorKind::Config, "experiment: M list must be strictly increasing");
  }
  require(!schemes.empty(), ErrorKind::Config, "experiment: no schemes selected");
  require(threads >= 1, ErrorKind::Config, "experiment: threads must be >= 1");
  require(pipeline.umf_restarts >= 1 && pipeline.umf_iterations >= 1, ErrorKind::Config,
          "experiment: invalid factorization budget");
  require(pipeline.epsilon_scale >= 0.0, ErrorKind::Config, "experiment: epsilon scale must be >= 0");
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t samples, int trial) {
  return mix_seed(mix_seed(mix_seed(master) ^ samples) ^ static_cast<std::uint64_t>(trial));
}

SourceConfig place_sources(const Scenario& scenario, std::uint64_t seed) {
  const double L = scenario.width;
  const std::vector<double> powers =
      scenario.powers.empty() ? std::vector<double>(static_cast<std::size_t>(scenario.sources), 1.0 / scenario.sources)
                              : scenario.powers;
  if (!scenario.positions.empty()) {
    SourceConfig s{scenario.positions, powers};
    s.validate(L);
    return s;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius = scenario.placement_radius * L;
  const double gap = scenario.min_separation * L;
  Points pts;
  for (int attempt = 0; attempt < 100000 && pts.size() < static_cast<std::size_t>(scenario.sources); ++attempt) {
    const double r = radius * std::sqrt(unit(rng));
    const double a = 2.0 * kPi * unit(rng);
    const Vec2 p(r * std::cos(a), r * std::sin(a));
    const bool ok = std::all_of(pts.begin(), pts.end(), [&](const Vec2& q) { return (p - q).norm() >= gap; });
    if (ok) pts.push_back(p);
  }
  require(pts.size() == static_cast<std::size_t>(scenario.sources), ErrorKind::Config,
          "placement: minimum separation cannot be met in the placement disc");
  return SourceConfig{pts, powers};
}

double pipeline_epsilon(const Scenario& scenario, const ObservationGrid& grid, const PipelineOptions& options) {
  return epsilon_with(scenario, grid, options, estimate_lipschitz(scenario.model(), grid.spacing()));
}

Points run_scheme(Scheme scheme, const MeasurementSet& ms, const Scenario& scenario, const PipelineOptions& options,
                  std::uint64_t seed) {
  const int K = scenario.sources;
  const double L = scenario.width;
  auto single_only = [&] { require(K == 1, ErrorKind::Unsupported, std::string(to_string(scheme)) + " needs K = 1"); };

  switch (scheme) {
    case Scheme::Naive:
      single_only();
      return {naive_localize(ms).position};
    case Scheme::WclQuarter:
    case Scheme::WclHalf: {
      single_only();
      const std::size_t div = scheme == Scheme::WclQuarter ? 4 : 2;
      const std::size_t window = std::max<std::size_t>(1, (ms.size() + div / 2) / div);
      return {wcl_localize(ms, window, L).position};
    }
    case Scheme::Kernel: {
      KernelOptions ko;
      ko.seed = seed;
      return kernel_localize(ms, static_cast<std::size_t>(K), ko).first;
    }
    case Scheme::ProposedSingle: {
      single_only();
      const ObservationGrid g = build_grid(ms, grid_size(ms, options), L, 0.0);
      return {localize_single(complete(g, completion_for(scenario, g, options)), g).position};
    }
    case Scheme::ProposedTwoSource: {
      require(K == 2, ErrorKind::Unsupported, "proposed-two-source needs K = 2");
      const int N = grid_size(ms, options);
      const double theta = best_rotation(ms, N, scenario, options, RotationMode::AlignMax);
      const ObservationGrid g = build_grid(ms, N, L, theta);
      const CompletedMatrix c = complete(g, completion_for(scenario, g, options));
      const auto [a, b] = localize_two_sources(c.U.col(0), c.V.col(0), g);
      return {a, b};
    }
    case Scheme::SimpleUmf: {
      const ObservationGrid g = build_grid(ms, grid_size(ms, options), L, 0.0);
      return umf_points(g, scenario, options, seed, denoise_enabled(scenario, options));
    }
    case Scheme::CompleteUmf:
    case Scheme::RotatedUmf: {
      const int N = grid_size(ms, options);
      const double theta = K >= 2 ? best_rotation(ms, N, scenario, options, RotationMode::SeparateMin) : 0.0;
      const ObservationGrid g = build_grid(ms, N, L, theta);
      const bool denoise = scheme == Scheme::CompleteUmf || denoise_enabled(scenario, options);
      return umf_points(g, scenario, options, seed, denoise);
    }
  }
  fail(ErrorKind::Config, "unknown scheme");
}

double match_and_score(const Points& estimates, const Points& truth, std::vector<double>* squared_errors) {
  require(estimates.size() == truth.size(), ErrorKind::Dimension, "matching: estimate and truth counts differ");
  require(!truth.empty() && truth.size() <= 8, ErrorKind::Config, "matching: supports 1 to 8 sources");
  std::vector<std::size_t> perm(truth.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) cost += (estimates[perm[k]] - truth[k]).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (squared_errors) {
    squared_errors->clear();
    for (std::size_t k = 0; k < truth.size(); ++k) squared_errors->push_back((estimates[best[k]] - truth[k]).squaredNorm());
  }
  return std::sqrt(best_cost / static_cast<double>(truth.size()));
}

std::vector<MetricRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const FieldModel model = spec.scenario.model();
  const std::size_t S = spec.schemes.size();
  const std::size_t T = static_cast<std::size_t>(spec.trials);
  const std::size_t items = spec.sample_counts.size() * T;
  std::vector<MetricRow> rows(items * S);

  SamplingOptions sampling;
  sampling.placement = spec.scenario.placement;
  sampling.noise_variance = spec.scenario.noise_variance();

  auto work = [&](std::size_t item) {
    const std::size_t M = spec.sample_counts[item / T];
    const int trial = static_cast<int>(item % T);
    const std::uint64_t seed = trial_seed(spec.seed, M, trial);
    const SourceConfig sources = place_sources(spec.scenario, mix_seed(seed ^ 1));
    const MeasurementSet ms = sample_measurements(sources, model, M, mix_seed(seed ^ 2), sampling);
    for (std::size_t s = 0; s < S; ++s) {
      MetricRow& row = rows[item * S + s];
      row.scheme = spec.schemes[s];
      row.samples = M;
      row.trial = trial;
      const auto start = std::chrono::steady_clock::now();
      try {
        const Points est = run_scheme(row.scheme, ms, spec.scenario, spec.pipeline, mix_seed(seed ^ (16 + s)));
        row.rmse = match_and_score(est, sources.positions, &row.squared_errors);
      } catch (const std::exception& e) {
        row.ok = false;
        row.rmse = std::numeric_limits<double>::quiet_NaN();
        row.message = e.what();
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  };

  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), std::max<std::size_t>(items, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < items; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items; i = next++) work(i);
      });
    for (auto& th : pool) th.join();
  }

  std::stable_sort(rows.begin(), rows.end(), [&](const MetricRow& a, const MetricRow& b) {
    const auto ia = std::find(spec.schemes.begin(), spec.schemes.end(), a.scheme) - spec.schemes.begin();
    const auto ib = std::find(spec.schemes.begin(), spec.schemes.end(), b.scheme) - spec.schemes.begin();
    if (ia != ib) return ia < ib;
    if (a.samples != b.samples) return a.samples < b.samples;
    return a.trial < b.trial;
  });
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows) {
  std::vector<std::pair<Scheme, std::size_t>> keys;
  std::map<std::pair<int, std::size_t>, std::vector<const MetricRow*>> groups;
  for (const auto& r : rows) {
    const auto key = std::make_pair(static_cast<int>(r.scheme), r.samples);
    if (groups.find(key) == groups.end()) keys.emplace_back(r.scheme, r.samples);
    groups[key].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& [scheme, M] : keys) {
    const auto& g = groups[{static_cast<int>(scheme), M}];
    SummaryRow s;
    s.scheme = scheme;
    s.samples = M;
    s.trials = g.size();
    std::vector<double> v;
    double sq = 0.0;
    for (const MetricRow* r : g) {
      if (!r->ok) {
        ++s.failures;
        continue;
      }
      v.push_back(r->rmse);
      sq += r->rmse * r->rmse;
    }
    s.median = quantile(v, 0.5);
    s.q1 = quantile(v, 0.25);
    s.q3 = quantile(v, 0.75);
    s.rms = v.empty() ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(sq / static_cast<double>(v.size()));
    out.push_back(s);
  }
  return out;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorKind::Dimension, "slope: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorKind::Domain, "slope: values must be positive");
    lx.push_back(std::log10(x[i]));
    ly.push_back(std::log10(y[i]));
  }
  std::vector<double> distinct = lx;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  require(distinct.size() >= 3, ErrorKind::Config, "slope: need at least 3 distinct abscissae");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

double median_rmse(const std::vector<MetricRow>& rows, Scheme scheme, std::size_t samples) {
  std::vector<double> v;
  for (const auto& r : rows)
    if (r.scheme == scheme && r.samples == samples && r.ok) v.push_back(r.rmse);
  return quantile(v, 0.5);
}

double fit_loglog_slope(const std::vector<MetricRow>& rows, Scheme scheme, std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> ms;
  for (const auto& r : rows)
    if (r.scheme == scheme && r.samples >= lo && r.samples <= hi) ms.push_back(r.samples);
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::vector<double> x, y;
  for (std::size_t M : ms) {
    x.push_back(static_cast<double>(M));
    y.push_back(median_rmse(rows, scheme, M));
  }
  return fit_loglog_slope(x, y);
}

void write_metrics(const std::vector<MetricRow>& rows, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "scheme,M,trial,ok,rmse,squared_errors,wall_ms,message\n" << std::setprecision(10);
  for (const auto& r : rows) {
    out << to_string(r.scheme) << ',' << r.samples << ',' << r.trial << ',' << (r.ok ? 1 : 0) << ',' << r.rmse << ',';
    for (std::size_t k = 0; k < r.squared_errors.size(); ++k) out << (k ? ";" : "") << r.squared_errors[k];
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << ',' << r.wall_ms << ',' << msg << '\n';
  }
}

void write_summary(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "scheme,M,trials,failures,median,q1,q3,rms\n" << std::setprecision(10);
  for (const auto& s : rows)
    out << to_string(s.scheme) << ',' << s.samples << ',' << s.trials << ',' << s.failures << ',' << s.median << ','
        << s.q1 << ',' << s.q3 << ',' << s.rms << '\n';
}

}  // namespace umfloc
