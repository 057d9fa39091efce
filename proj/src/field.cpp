#include "umfloc/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "umfloc/error.hpp"

namespace umfloc {

const char* to_string(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::Gaussian: return "gaussian";
    case FieldKind::Laplacian: return "laplacian";
    case FieldKind::UnderwaterAcoustic: return "underwater";
    case FieldKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

void SourceConfig::validate(double width) const {
  require(!positions.empty(), ErrorKind::Config, "sources: K must be at least 1");
  require(positions.size() == powers.size(), ErrorKind::Config, "sources: positions and powers differ in length");
  for (double a : powers) require(a > 0.0 && std::isfinite(a), ErrorKind::Config, "sources: powers must be positive");
  const double radius = width / 4.0;
  for (const auto& p : positions)
    require(p.norm() <= radius * (1.0 + 1e-12), ErrorKind::Config,
            "sources: every source must lie within L/4 of the area centre");
}

SourceConfig SourceConfig::equal_power(Points positions, double power) {
  SourceConfig cfg;
  cfg.powers.assign(positions.size(), power);
  cfg.positions = std::move(positions);
  return cfg;
}

void UnderwaterParams::validate() const {
  require(path_count >= 1, ErrorKind::Config, "underwater: path count must be >= 1");
  require(window_s > 0.0, ErrorKind::Config, "underwater: receive window must be positive");
  require(decay_per_s >= 0.0, ErrorKind::Config, "underwater: decay must be non-negative");
  require(mean_interarrival_ms > 0.0, ErrorKind::Config, "underwater: mean inter-arrival must be positive");
  require(carrier_khz > 0.0, ErrorKind::Config, "underwater: carrier must be positive");
}

double thorp_absorption_db(double f) {
  const double f2 = f * f;
  return 0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003;
}

double expected_multipath_energy(const UnderwaterParams& params) {
  params.validate();
  // Arrival of path p (p >= 2) is a sum of p-1 exponential gaps, so
  // E[e^{-phi T} 1{T <= W}] = (rate/(rate+phi))^n * P(Gamma(n, rate+phi) <= W).
  const double rate = 1000.0 / params.mean_interarrival_ms;
  const double phi = params.decay_per_s;
  const double x = (rate + phi) * params.window_s;
  const double ratio = rate / (rate + phi);
  double total = 1.0;  // first path defines the window start
  double ratio_pow = 1.0;
  for (int n = 1; n < params.path_count; ++n) {
    ratio_pow *= ratio;
    double term = 1.0, tail = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j > 0) term *= x / j;
      tail += term;
    }
    const double cdf = std::max(0.0, 1.0 - std::exp(-x) * tail);
    total += ratio_pow * cdf;
  }
  return total;
}

namespace {

double underwater_profile(double d, double absorption, double multipath) {
  if (std::isinf(d)) return 0.0;
  return multipath / (1.0 + std::pow(d, 1.5) * std::pow(absorption, d));
}

}  // namespace

double underwater_expected_energy(const UnderwaterParams& params, double d_km) {
  require(d_km > 0.0, ErrorKind::Domain, "underwater energy: distance must be positive");
  const double a = std::pow(10.0, thorp_absorption_db(params.carrier_khz) / 10.0);
  return underwater_profile(d_km, a, expected_multipath_energy(params));
}

FieldModel FieldModel::gaussian(double gamma, double width, bool normalize) {
  require(gamma > 0.0, ErrorKind::Config, "gaussian field: gamma must be positive");
  require(width > 0.0, ErrorKind::Config, "field: width must be positive");
  FieldModel m;
  m.kind_ = FieldKind::Gaussian;
  m.gamma_ = gamma;
  m.width_ = width;
  m.finish(normalize);
  return m;
}

FieldModel FieldModel::laplacian(double gamma, double width, bool normalize) {
  require(gamma > 0.0, ErrorKind::Config, "laplacian field: gamma must be positive");
  require(width > 0.0, ErrorKind::Config, "field: width must be positive");
  FieldModel m;
  m.kind_ = FieldKind::Laplacian;
  m.gamma_ = gamma;
  m.width_ = width;
  m.finish(normalize);
  return m;
}

FieldModel FieldModel::underwater(const UnderwaterParams& params, double width, bool normalize) {
  params.validate();
  require(width > 0.0, ErrorKind::Config, "field: width must be positive");
  FieldModel m;
  m.kind_ = FieldKind::UnderwaterAcoustic;
  m.width_ = width;
  m.underwater_ = params;
  m.multipath_energy_ = expected_multipath_energy(params);
  m.absorption_ = std::pow(10.0, thorp_absorption_db(params.carrier_khz) / 10.0);
  m.finish(normalize);
  return m;
}

FieldModel FieldModel::tabulated(std::vector<double> radii, std::vector<double> values, double width,
                                 bool normalize, std::optional<PiecewiseLinear> limiting_profile) {
  require(width > 0.0, ErrorKind::Config, "field: width must be positive");
  require(radii.size() >= 2 && radii.size() == values.size(), ErrorKind::Config,
          "tabulated field: need at least two (radius, value) pairs");
  require(radii.front() == 0.0, ErrorKind::Config, "tabulated field: first radius must be 0");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] >= 0.0, ErrorKind::Config, "tabulated field: values must be non-negative");
    if (i > 0)
      require(values[i] < values[i - 1], ErrorKind::Config, "tabulated field: values must strictly decrease");
  }
  FieldModel m;
  m.kind_ = FieldKind::Tabulated;
  m.width_ = width;
  m.table_ = PiecewiseLinear(std::move(radii), std::move(values));
  if (limiting_profile) {
    // Mirror the x >= 0 samples into a symmetric profile.
    const auto& k = limiting_profile->knots();
    const auto& v = limiting_profile->values();
    require(k.front() == 0.0, ErrorKind::Config, "tabulated field: limiting profile must start at x = 0");
    std::vector<double> knots, vals;
    for (std::size_t i = k.size(); i-- > 1;) {
      knots.push_back(-k[i]);
      vals.push_back(v[i]);
    }
    knots.insert(knots.end(), k.begin(), k.end());
    vals.insert(vals.end(), v.begin(), v.end());
    m.limiting_ = PiecewiseLinear(std::move(knots), std::move(vals));
    m.limiting_norm_ = product_integral(*m.limiting_, *m.limiting_);
    require(m.limiting_norm_ > 0.0, ErrorKind::Degenerate, "tabulated field: limiting profile is zero");
  }
  m.finish(normalize);
  return m;
}

void FieldModel::finish(bool normalize) {
  scale_ = 1.0;
  normalized_ = normalize;
  if (normalize) {
    const double integral = energy_integral();
    require(integral > 0.0, ErrorKind::Degenerate, "field: zero energy over the area");
    scale_ = 1.0 / std::sqrt(integral);
  }
}

double FieldModel::base(double d) const {
  switch (kind_) {
    case FieldKind::Gaussian:
      return std::sqrt(2.0 * gamma_ / kPi) * std::exp(-gamma_ * d * d);
    case FieldKind::Laplacian:
      return gamma_ * std::exp(-gamma_ * d);
    case FieldKind::UnderwaterAcoustic:
      return underwater_profile(d, absorption_, multipath_energy_);
    case FieldKind::Tabulated:
      return d > table_.upper() ? 0.0 : table_(d);
  }
  return 0.0;
}

double FieldModel::eval(double d) const {
  require(d >= 0.0, ErrorKind::Domain, "field: distance must be non-negative");
  return scale_ * base(d);
}

double FieldModel::distance(const Vec2& offset) const {
  if (kind_ == FieldKind::Laplacian) return std::abs(offset.x()) + std::abs(offset.y());
  return offset.norm();
}

double FieldModel::energy_at(const Vec2& offset) const { return scale_ * base(distance(offset)); }

double FieldModel::support_radius() const {
  if (kind_ == FieldKind::Tabulated) return table_.upper();
  return std::numeric_limits<double>::infinity();
}

double FieldModel::energy_integral(int cells) const {
  require(cells >= 2 && cells % 2 == 0, ErrorKind::Config, "field: quadrature needs an even cell count");
  // The integrand is symmetric in both axes; sum one quadrant.
  const double h = width_ / cells;
  const int half = cells / 2;
  double sum = 0.0;
  for (int i = 0; i < half; ++i) {
    const double x = (i + 0.5) * h;
    double row = 0.0;
    for (int j = 0; j < half; ++j) {
      const double y = (j + 0.5) * h;
      const double e = scale_ * base(distance(Vec2(x, y)));
      row += e * e;
    }
    sum += row;
  }
  return 4.0 * sum * h * h;
}

bool FieldModel::has_autocorrelation() const {
  return kind_ == FieldKind::Gaussian || kind_ == FieldKind::Laplacian ||
         (kind_ == FieldKind::Tabulated && limiting_.has_value());
}

double FieldModel::autocorrelation(double t) const {
  const double a = std::abs(t);
  switch (kind_) {
    case FieldKind::Gaussian:
      return std::exp(-gamma_ * a * a / 2.0);
    case FieldKind::Laplacian:
      return (1.0 + gamma_ * a) * std::exp(-gamma_ * a);
    case FieldKind::Tabulated:
      if (limiting_) return product_integral(*limiting_, limiting_->shifted(a)) / limiting_norm_;
      break;
    case FieldKind::UnderwaterAcoustic:
      break;
  }
  fail(ErrorKind::Unsupported, std::string("field: no autocorrelation available for ") + to_string(kind_));
}

double field_energy(const SourceConfig& sources, const FieldModel& model, const Vec2& z) {
  double e = 0.0;
  for (std::size_t k = 0; k < sources.count(); ++k)
    e += sources.powers[k] * model.energy_at(z - sources.positions[k]);
  return e;
}

namespace {

/// Captured multipath energy of one random channel realisation divided by its expectation.
double multipath_fading(const UnderwaterParams& p, double expected, std::mt19937_64& rng) {
  std::exponential_distribution<double> gap(1000.0 / p.mean_interarrival_ms);
  double arrival = 0.0, captured = 0.0;
  for (int path = 0; path < p.path_count; ++path) {
    if (path > 0) arrival += gap(rng);
    if (arrival > p.window_s) break;
    std::exponential_distribution<double> power(1.0 / std::exp(-p.decay_per_s * arrival));
    captured += power(rng);
  }
  return captured / expected;
}

}  // namespace

MeasurementSet sample_measurements(const SourceConfig& sources, const FieldModel& model, std::size_t count,
                                   std::uint64_t seed, const SamplingOptions& options) {
  require(count >= 1, ErrorKind::Config, "sampling: M must be at least 1");
  require(options.noise_variance >= 0.0, ErrorKind::Config, "sampling: noise variance must be non-negative");
  require(options.bound_sigmas > 0.0, ErrorKind::Config, "sampling: noise bound must be positive");
  sources.validate(model.width());

  std::mt19937_64 rng(seed);
  const double half = model.width() / 2.0;
  MeasurementSet ms;
  ms.seed = seed;
  ms.locations.reserve(count);

  if (options.placement == Placement::UniformRandom) {
    std::uniform_real_distribution<double> coord(-half, half);
    for (std::size_t m = 0; m < count; ++m) {
      const double x = coord(rng);
      const double y = coord(rng);
      ms.locations.emplace_back(x, y);
    }
  } else {
    const auto g = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    std::vector<std::size_t> cells(g * g);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::shuffle(cells.begin(), cells.end(), rng);
    const double h = model.width() / static_cast<double>(g);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    for (std::size_t m = 0; m < count; ++m) {
      const double cx = static_cast<double>(cells[m] % g);
      const double cy = static_cast<double>(cells[m] / g);
      const double x = -half + (cx + jitter(rng)) * h;
      const double y = -half + (cy + jitter(rng)) * h;
      ms.locations.emplace_back(x, y);
    }
  }

  const double sigma = std::sqrt(options.noise_variance);
  ms.noise_bound = options.bound_sigmas * sigma;
  std::normal_distribution<double> gauss(0.0, sigma > 0.0 ? sigma : 1.0);
  const bool fading = model.kind() == FieldKind::UnderwaterAcoustic && model.underwater_params().fading;
  const double expected = fading ? expected_multipath_energy(model.underwater_params()) : 1.0;

  ms.energies.reserve(count);
  for (const auto& z : ms.locations) {
    double e = 0.0;
    for (std::size_t k = 0; k < sources.count(); ++k) {
      double contribution = sources.powers[k] * model.energy_at(z - sources.positions[k]);
      if (fading) contribution *= multipath_fading(model.underwater_params(), expected, rng);
      e += contribution;
    }
    if (sigma > 0.0) {
      double n;
      do {
        n = gauss(rng);
      } while (std::abs(n) >= ms.noise_bound);
      e += n;
    }
    ms.energies.push_back(std::max(0.0, e));
  }
  return ms;
}

}  // namespace umfloc
