#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "umfloc/field.hpp"
#include "umfloc/lowrank.hpp"

namespace umfloc {

enum class RotationMode { AlignMax, SeparateMin };

const char* to_string(RotationMode mode) noexcept;

/// rho as a function of the grid rotation angle (radians).
using RhoFunction = std::function<double(double)>;

struct RotationOptions {
  double coarse_step = deg2rad(5.0);
  double tolerance = deg2rad(0.5);
  double flat_spread = 0.01;  // coarse-scan rho range below which the profile is flagged flat
};

struct RotationProfile {
  std::vector<double> thetas;  // every evaluated angle reduced to [0, pi/2), sorted
  std::vector<double> rho;
  double best_theta = 0.0;
  double best_rho = 0.0;
  RotationMode mode = RotationMode::AlignMax;
  bool flat = false;
  bool fallback = false;  // coarse scan was not circularly unimodal
};

/// sigma_1^2 / sum sigma_k^2; zero for an all-zero spectrum.
double spectral_concentration(const Eigen::VectorXd& sigma);

/// Builds the grid at theta, completes it and returns the spectral concentration.
double rho(const MeasurementSet& ms, int size, double width, double theta, const CompletionConfig& cfg);
RhoFunction measurement_rho(const MeasurementSet& ms, int size, double width, const CompletionConfig& cfg);
/// rho of the noise-free, fully sampled aggregate signature matrix.
RhoFunction exact_rho(const SourceConfig& sources, const FieldModel& model, int size, double width);

RotationProfile find_rotation(const RhoFunction& f, RotationMode mode, const RotationOptions& options = {});
RotationProfile find_rotation(const MeasurementSet& ms, int size, double width, const CompletionConfig& cfg,
                              RotationMode mode, const RotationOptions& options = {});

/// Samples s tau'(t) > t tau'(s) for 0 < s < t <= t_max on a uniform lattice,
/// with tau' from central differences.
bool satisfies_correlation_condition(const std::function<double(double)>& tau, double t_max, int samples = 60);

/// Samples of (theta, rho) that break monotonicity on either flank of
/// theta_star (within pi/4) by more than `tolerance`.
int count_flank_violations(const std::vector<double>& thetas, const std::vector<double>& rho, double theta_star,
                           double tolerance);

void write_rotation_profile(const RotationProfile& profile, const std::string& path);

}  // namespace umfloc
