#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "umfloc/error.hpp"
#include "umfloc/field.hpp"

using namespace umfloc;

namespace {

std::vector<FieldModel> builtin_models() {
  UnderwaterParams p;
  return {FieldModel::gaussian(20.0, 1.0), FieldModel::laplacian(20.0, 1.0), FieldModel::underwater(p, 5.0)};
}

}  // namespace

TEST(Field, GaussianPeakValue) {
  const FieldModel raw = FieldModel::gaussian(20.0, 1.0, false);
  EXPECT_NEAR(raw.eval(0.0), std::sqrt(40.0 / kPi), 1e-12);
  EXPECT_NEAR(raw.eval(0.0), 3.568, 1e-3);
  // Normalization barely changes the Gaussian on L = 1.
  EXPECT_NEAR(FieldModel::gaussian(20.0, 1.0).eval(0.0), 3.568, 5e-3);
}

TEST(Field, VanishesBeyondSupport) {
  for (const auto& m : builtin_models()) EXPECT_EQ(m.eval(std::numeric_limits<double>::infinity()), 0.0);
  const FieldModel t = FieldModel::tabulated({0.0, 0.1, 0.2}, {2.0, 1.0, 0.0}, 1.0, false);
  EXPECT_EQ(t.eval(0.25), 0.0);
  EXPECT_DOUBLE_EQ(t.eval(0.05), 1.5);
}

TEST(Field, NegativeDistanceIsDomainError) {
  try {
    FieldModel::gaussian(20.0, 1.0).eval(-0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(Field, ThorpAbsorptionAtFiveKilohertz) {
  const double f2 = 25.0;
  const double oracle = 0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003;
  EXPECT_NEAR(thorp_absorption_db(5.0), oracle, 1e-12);
  EXPECT_NEAR(thorp_absorption_db(5.0), 0.382, 1e-3);
  EXPECT_NEAR(std::pow(10.0, thorp_absorption_db(5.0) / 10.0), 1.092, 1e-3);
}

TEST(Field, UnderwaterAttenuationLimitAndDecrease) {
  UnderwaterParams p;
  const double e0 = expected_multipath_energy(p);
  EXPECT_NEAR(underwater_expected_energy(p, 1e-12) / e0, 1.0, 1e-9);
  EXPECT_LT(underwater_expected_energy(p, 2.0), underwater_expected_energy(p, 1.0));
  EXPECT_THROW(underwater_expected_energy(p, 0.0), Error);
  const double a = std::pow(10.0, thorp_absorption_db(5.0) / 10.0);
  EXPECT_NEAR(underwater_expected_energy(p, 1.0), e0 / (1.0 + a), 1e-12 * e0);
}

TEST(Field, MultipathEnergyMatchesMonteCarloOracle) {
  // Expected captured energy: sum over paths of E[exp(-phi tau_p) 1{tau_p <= window}],
  // with tau_1 = 0 and exponential gaps.
  UnderwaterParams p;
  std::mt19937_64 rng(11);
  std::exponential_distribution<double> gap(1000.0 / p.mean_interarrival_ms);
  double sum = 0.0;
  const int trials = 200000;
  for (int t = 0; t < trials; ++t) {
    double tau = 0.0;
    for (int k = 0; k < p.path_count; ++k) {
      if (k > 0) tau += gap(rng);
      if (tau > p.window_s) break;
      sum += std::exp(-p.decay_per_s * tau);
    }
  }
  EXPECT_NEAR(expected_multipath_energy(p), sum / trials, 5e-3 * sum / trials);
}

TEST(Field, StrictlyDecreasing) {
  for (const auto& m : builtin_models()) {
    const double reach = m.width() / 2.0;
    double prev = m.kind() == FieldKind::UnderwaterAcoustic ? m.eval(1e-6) : m.eval(0.0);
    for (int k = 1; k <= 200; ++k) {
      const double cur = m.eval(reach * k / 200.0);
      EXPECT_LT(cur, prev) << to_string(m.kind()) << " at step " << k;
      EXPECT_GE(cur, 0.0);
      prev = cur;
    }
  }
}

TEST(Field, NormalizedEnergyIntegral) {
  for (const auto& m : builtin_models()) {
    // Independent check on a finer offset grid than construction uses.
    const int n = 1500;
    const double h = m.width() / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double e = m.energy_at(Vec2(-m.width() / 2 + (i + 0.5) * h, -m.width() / 2 + (j + 0.5) * h));
        sum += e * e;
      }
    EXPECT_NEAR(sum * h * h, 1.0, 1e-3) << to_string(m.kind());
  }
}

TEST(Field, AutocorrelationClosedForms) {
  const FieldModel g = FieldModel::gaussian(20.0, 1.0);
  const FieldModel l = FieldModel::laplacian(20.0, 1.0);
  for (double t : {0.0, 0.05, 0.1, 0.3}) {
    EXPECT_NEAR(g.autocorrelation(t), std::exp(-20.0 * t * t / 2.0), 1e-15);
    EXPECT_NEAR(l.autocorrelation(t), (1.0 + 20.0 * t) * std::exp(-20.0 * t), 1e-15);
    EXPECT_EQ(g.autocorrelation(-t), g.autocorrelation(t));
    EXPECT_EQ(l.autocorrelation(-t), l.autocorrelation(t));
  }
  EXPECT_EQ(g.autocorrelation(0.0), 1.0);
  EXPECT_EQ(l.autocorrelation(0.0), 1.0);
}

TEST(Field, LaplacianAutocorrelationMatchesQuadrature) {
  const double gamma = 20.0;
  for (double t : {0.02, 0.1, 0.25}) {
    double num = 0.0, den = 0.0;
    const double h = 1e-4;
    for (double x = -3.0; x <= 3.0; x += h) {
      num += std::exp(-gamma * std::abs(x)) * std::exp(-gamma * std::abs(x - t)) * h;
      den += std::exp(-2.0 * gamma * std::abs(x)) * h;
    }
    EXPECT_NEAR(FieldModel::laplacian(gamma, 1.0).autocorrelation(t), num / den, 1e-3);
  }
}

TEST(Field, AutocorrelationStrictlyDecreasing) {
  for (const auto& m : {FieldModel::gaussian(20.0, 1.0), FieldModel::laplacian(20.0, 1.0)}) {
    double prev = 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double cur = m.autocorrelation(0.5 * k / 100.0);
      EXPECT_LT(cur, prev);
      EXPECT_GE(cur, 0.0);
      prev = cur;
    }
  }
}

TEST(Field, TabulatedAutocorrelation) {
  PiecewiseLinear w({0.0, 0.2}, {1.0, 0.0});
  const FieldModel t = FieldModel::tabulated({0.0, 0.2}, {1.0, 0.0}, 1.0, false, w);
  EXPECT_NEAR(t.autocorrelation(0.0), 1.0, 1e-12);
  // Triangle of half-width a: tau(t) = 1 - 3/2 (t/a)^2 + 3/4 (t/a)^3 for t <= a.
  const double a = 0.2, x = 0.1 / a;
  EXPECT_NEAR(t.autocorrelation(0.1), 1.0 - 1.5 * x * x + 0.75 * x * x * x, 1e-12);
}

TEST(Field, UnderwaterHasNoAutocorrelation) {
  const FieldModel m = FieldModel::underwater(UnderwaterParams{}, 5.0);
  EXPECT_FALSE(m.has_autocorrelation());
  try {
    m.autocorrelation(0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unsupported);
  }
}

TEST(Field, GaussianSatisfiesCorrelationCondition) {
  const FieldModel g = FieldModel::gaussian(20.0, 1.0);
  const double h = 1e-6;
  auto d = [&](double t) { return (g.autocorrelation(t + h) - g.autocorrelation(t - h)) / (2 * h); };
  for (int i = 1; i <= 20; ++i)
    for (int j = i + 1; j <= 20; ++j) {
      const double s = 0.5 * i / 20.0, t = 0.5 * j / 20.0;
      EXPECT_GT(s * d(t), t * d(s));
    }
}

TEST(Field, SourceConfigValidation) {
  EXPECT_NO_THROW(SourceConfig::equal_power({Vec2(0.1, 0.1)}).validate(1.0));
  EXPECT_THROW(SourceConfig::equal_power({Vec2(0.3, 0.0)}).validate(1.0), Error);
  EXPECT_THROW(SourceConfig::equal_power({}).validate(1.0), Error);
  SourceConfig bad = SourceConfig::equal_power({Vec2(0.0, 0.0)});
  bad.powers = {-1.0};
  EXPECT_THROW(bad.validate(1.0), Error);
  bad.powers = {1.0, 1.0};
  EXPECT_THROW(bad.validate(1.0), Error);
}

TEST(Field, NoiselessSamplingIsSuperposition) {
  const FieldModel m = FieldModel::gaussian(20.0, 1.0);
  SourceConfig s{{Vec2(0.1, 0.0), Vec2(-0.1, 0.0)}, {1.0, 0.5}};
  const MeasurementSet ms = sample_measurements(s, m, 200, 42);
  ASSERT_EQ(ms.size(), 200u);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Vec2& z = ms.locations[i];
    EXPECT_LE(std::abs(z.x()), 0.5);
    EXPECT_LE(std::abs(z.y()), 0.5);
    const double expect = 1.0 * m.eval((z - s.positions[0]).norm()) + 0.5 * m.eval((z - s.positions[1]).norm());
    EXPECT_DOUBLE_EQ(ms.energies[i], expect);
  }
}

TEST(Field, SensorOnSourceAndEquidistantSensor) {
  const FieldModel m = FieldModel::gaussian(20.0, 1.0);
  const SourceConfig one = SourceConfig::equal_power({Vec2(0.1, 0.05)}, 2.0);
  EXPECT_DOUBLE_EQ(field_energy(one, m, Vec2(0.1, 0.05)), 2.0 * m.eval(0.0));
  const SourceConfig two = SourceConfig::equal_power({Vec2(0.1, 0.0), Vec2(-0.1, 0.0)});
  EXPECT_DOUBLE_EQ(field_energy(two, m, Vec2(0.0, 0.2)), 2.0 * m.eval(std::hypot(0.1, 0.2)));
}

TEST(Field, SamplingIsDeterministicInSeed) {
  const FieldModel m = FieldModel::gaussian(20.0, 1.0);
  const SourceConfig s = SourceConfig::equal_power({Vec2(0.0, 0.1)});
  SamplingOptions opt;
  opt.noise_variance = 1e-2;
  const MeasurementSet a = sample_measurements(s, m, 100, 7, opt);
  const MeasurementSet b = sample_measurements(s, m, 100, 7, opt);
  const MeasurementSet c = sample_measurements(s, m, 100, 8, opt);
  EXPECT_EQ(a.energies, b.energies);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.locations[i], b.locations[i]);
  EXPECT_NE(a.energies, c.energies);
}

TEST(Field, NoiseIsTruncatedAndClamped) {
  const FieldModel m = FieldModel::gaussian(20.0, 1.0);
  const SourceConfig s = SourceConfig::equal_power({Vec2(0.0, 0.0)});
  SamplingOptions opt;
  opt.noise_variance = 0.04;
  opt.bound_sigmas = 2.0;
  const MeasurementSet ms = sample_measurements(s, m, 2000, 3, opt);
  EXPECT_NEAR(ms.noise_bound, 0.4, 1e-12);
  double mean_noise = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double clean = field_energy(s, m, ms.locations[i]);
    EXPECT_GE(ms.energies[i], 0.0);
    if (ms.energies[i] > 0.0) EXPECT_LT(std::abs(ms.energies[i] - clean), 0.4 + 1e-12);
    mean_noise += ms.energies[i] - clean;
  }
  EXPECT_GT(mean_noise, 0.0);  // clamping at zero biases upward
}

TEST(Field, GridJitteredPlacementCoversArea) {
  const FieldModel m = FieldModel::gaussian(20.0, 1.0);
  const SourceConfig s = SourceConfig::equal_power({Vec2(0.0, 0.0)});
  SamplingOptions opt;
  opt.placement = Placement::GridJittered;
  const MeasurementSet ms = sample_measurements(s, m, 100, 5, opt);
  ASSERT_EQ(ms.size(), 100u);
  std::vector<int> count(100, 0);
  for (const auto& z : ms.locations) {
    const int i = std::min(9, static_cast<int>((z.x() + 0.5) * 10));
    const int j = std::min(9, static_cast<int>((z.y() + 0.5) * 10));
    ++count[i * 10 + j];
  }
  for (int c : count) EXPECT_EQ(c, 1);
}
