#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "umfloc/error.hpp"
#include "umfloc/grid.hpp"
#include "umfloc/rotation.hpp"

using namespace umfloc;

namespace {

const FieldModel& gaussian() {
  static const FieldModel m = FieldModel::gaussian(20.0, 1.0);
  return m;
}

// Two equal sources on a line through the origin at angle phi.
SourceConfig pair_on_line(double phi, double half = 0.15) {
  const Vec2 d(std::cos(phi), std::sin(phi));
  return SourceConfig::equal_power({half * d, -half * d});
}

// One reading at every cell centre of the unrotated n x n grid.
MeasurementSet lattice(const SourceConfig& s, int n) {
  MeasurementSet ms;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 z(-0.5 + (j + 0.5) / n, -0.5 + (i + 0.5) / n);
      ms.locations.push_back(z);
      double e = 0.0;
      for (std::size_t k = 0; k < s.positions.size(); ++k) e += s.powers[k] * gaussian().energy_at(z - s.positions[k]);
      ms.energies.push_back(e);
    }
  return ms;
}

double circular_distance_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 90.0);
  return std::min(d, 90.0 - d);
}

}  // namespace

TEST(SpectralConcentration, Basics) {
  EXPECT_EQ(spectral_concentration(Eigen::Vector3d(2.0, 0.0, 0.0)), 1.0);
  EXPECT_EQ(spectral_concentration(Eigen::Vector3d::Zero()), 0.0);
  EXPECT_NEAR(spectral_concentration(Eigen::Vector3d(3.0, 2.0, 1.0)), 9.0 / 14.0, 1e-15);
  EXPECT_NEAR(spectral_concentration(Eigen::Vector2d(1.0, 1.0)), 0.5, 1e-15);
}

TEST(Rho, RankOneMeasurementsGiveOne) {
  const MeasurementSet ms = lattice(SourceConfig::equal_power({Vec2(0.07, -0.11)}), 16);
  EXPECT_NEAR(rho(ms, 16, 1.0, 0.0, CompletionConfig{}), 1.0, 1e-12);
}

TEST(Rho, QuarterTurnOnFullLattice) {
  const MeasurementSet ms = lattice(pair_on_line(0.4), 16);
  const RhoFunction f = measurement_rho(ms, 16, 1.0, CompletionConfig{});
  EXPECT_NEAR(f(0.0), f(kPi / 2), 1e-6);
}

TEST(Rho, ExactPeriodicity) {
  const RhoFunction f = exact_rho(pair_on_line(deg2rad(25.0)), gaussian(), 32, 1.0);
  for (double deg : {0.0, 7.0, 19.0, 33.0, 51.0, 80.0}) {
    const double t = deg2rad(deg);
    EXPECT_NEAR(f(t), f(t + kPi / 2), 1e-6) << deg;
    EXPECT_GT(f(t), 0.0);
    EXPECT_LE(f(t), 1.0 + 1e-12);
  }
}

TEST(Rho, AxisAlignedPairConcentratesAtZero) {
  const RhoFunction f = exact_rho(pair_on_line(0.0), gaussian(), 32, 1.0);
  EXPECT_GT(f(0.0), f(kPi / 4));
}

TEST(FindRotation, AlignMaxFindsLineAngle) {
  for (double phi : {30.0, 60.0, 12.0}) {
    const RotationProfile p = find_rotation(exact_rho(pair_on_line(deg2rad(phi)), gaussian(), 64, 1.0),
                                            RotationMode::AlignMax);
    EXPECT_LE(circular_distance_deg(rad2deg(p.best_theta), phi), 1.0) << phi;
    EXPECT_FALSE(p.flat);
    EXPECT_FALSE(p.fallback);
    EXPECT_TRUE(std::is_sorted(p.thetas.begin(), p.thetas.end()));
    for (double t : p.thetas) {
      EXPECT_GE(t, 0.0);
      EXPECT_LT(t, kPi / 2);
    }
  }
}

TEST(FindRotation, SingleSourceIsFlat) {
  const RhoFunction f = exact_rho(SourceConfig::equal_power({Vec2(0.1, 0.05)}), gaussian(), 32, 1.0);
  const RotationProfile p = find_rotation(f, RotationMode::AlignMax);
  EXPECT_TRUE(p.flat);
  EXPECT_LE(std::abs(p.best_rho - f(0.0)), 0.05);
}

TEST(FindRotation, SeparateMinAvoidsAxes) {
  const RotationProfile p = find_rotation(exact_rho(pair_on_line(0.0), gaussian(), 32, 1.0), RotationMode::SeparateMin);
  const double deg = rad2deg(p.best_theta);
  EXPECT_GE(deg, 10.0);
  EXPECT_LE(deg, 80.0);
  for (double r : p.rho) EXPECT_GE(r, p.best_rho - 1e-12);
}

TEST(FindRotation, MonotoneFlanksOnTwoSourceInstance) {
  const double phi = deg2rad(30.0);
  const RhoFunction f = exact_rho(pair_on_line(phi), gaussian(), 64, 1.0);
  std::vector<double> t, r;
  for (int k = 0; k < 36; ++k) {
    t.push_back(k * kPi / 72);
    r.push_back(f(t.back()));
  }
  EXPECT_LE(count_flank_violations(t, r, phi, 1e-3), 1);
}

TEST(FindRotation, MultimodalScanFallsBack) {
  const RhoFunction f = [](double t) { return 0.5 + 0.2 * std::cos(8.0 * t) + 0.1 * std::sin(3.0 * t); };
  const RotationProfile p = find_rotation(f, RotationMode::AlignMax);
  EXPECT_TRUE(p.fallback);
  for (double r : p.rho) EXPECT_LE(r, p.best_rho + 1e-12);
}

TEST(FindRotation, BadOptions) {
  RotationOptions o;
  o.coarse_step = 0.0;
  EXPECT_THROW(find_rotation([](double) { return 1.0; }, RotationMode::AlignMax, o), Error);
}

TEST(CorrelationCondition, GaussianAndLaplacianHold) {
  EXPECT_TRUE(satisfies_correlation_condition([](double t) { return std::exp(-20.0 * t * t / 2.0); }, 0.5));
  EXPECT_TRUE(satisfies_correlation_condition([](double t) { return (1.0 + 20.0 * t) * std::exp(-20.0 * t); }, 0.5));
}

TEST(CorrelationCondition, ParabolaFails) {
  EXPECT_FALSE(satisfies_correlation_condition([](double t) { return 1.0 - t * t; }, 0.5));
  EXPECT_FALSE(satisfies_correlation_condition([](double t) { return 1.0 - t * t * t; }, 0.5));
}

TEST(FlankViolations, CountsOnlyWrongDirection) {
  std::vector<double> t, r;
  for (int k = 0; k < 18; ++k) {
    t.push_back(k * kPi / 36);
    r.push_back(std::cos(4.0 * (t.back() - 0.3)));
  }
  EXPECT_EQ(count_flank_violations(t, r, 0.3, 1e-9), 0);
  r[1] += 0.5;
  EXPECT_GE(count_flank_violations(t, r, 0.3, 1e-9), 1);
  EXPECT_THROW(count_flank_violations(t, {1.0}, 0.3, 1e-9), Error);
}

TEST(RotationProfileCsv, Header) {
  const RotationProfile p = find_rotation([](double t) { return std::cos(2.0 * t) * 0.2 + 0.7; }, RotationMode::AlignMax);
  const auto path = (std::filesystem::temp_directory_path() / "umfloc_rho.csv").string();
  write_rotation_profile(p, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "theta_deg,rho");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(p.thetas.size()));
  std::filesystem::remove(path);
}
