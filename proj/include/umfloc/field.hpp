#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "umfloc/geometry.hpp"
#include "umfloc/piecewise_linear.hpp"

namespace umfloc {

/// Emitter layout. Positions in km, powers in normalized energy units.
struct SourceConfig {
  Points positions;
  std::vector<double> powers;

  std::size_t count() const { return positions.size(); }
  /// Throws ErrorKind::Config unless K >= 1, lengths agree, powers > 0 and
  /// every source lies in the disc of radius L/4 about the origin.
  void validate(double width) const;

  static SourceConfig equal_power(Points positions, double power = 1.0);
};

/// Multipath channel parameters for the underwater acoustic energy profile.
struct UnderwaterParams {
  double carrier_khz = 5.0;
  int path_count = 15;
  double mean_interarrival_ms = 100.0;
  double decay_per_s = 2.0;
  double window_s = 4.0;
  double noise_ratio_db = -34.0;
  /// Per-measurement multipath fading applied by sample_measurements.
  bool fading = false;

  void validate() const;
};

/// Thorp absorption 10 log10 A(f) in dB/km, f in kHz.
double thorp_absorption_db(double carrier_khz);

/// Expected energy captured in the receive window by the multipath arrivals,
/// relative to a unit-power first path.
double expected_multipath_energy(const UnderwaterParams& params);

/// (1 + d^1.5 A(f)^d)^-1 times the expected captured multipath energy. d > 0.
double underwater_expected_energy(const UnderwaterParams& params, double d_km);

enum class FieldKind { Gaussian, Laplacian, UnderwaterAcoustic, Tabulated };

const char* to_string(FieldKind kind) noexcept;

/// Radially decreasing energy density h(d) of a unit-power source.
///
/// The Laplacian field is the separable h(x, y) = g e^{-g|x| - g|y|}; its
/// "distance" is the L1 norm of the offset, so eval() takes an L1 distance
/// and energy_at() applies the right metric for every kind.
///
/// With normalization on, the profile is scaled at construction so that the
/// integral of h^2 over the L x L area centred on the source equals one
/// (tensor-product midpoint rule on 2048^2 cells).
class FieldModel {
 public:
  static FieldModel gaussian(double gamma, double width, bool normalize = true);
  static FieldModel laplacian(double gamma, double width, bool normalize = true);
  static FieldModel underwater(const UnderwaterParams& params, double width, bool normalize = true);
  /// h is piecewise linear over `radii` (radii[0] == 0, strictly increasing
  /// values, zero past the last radius). `limiting_profile`, if given, is the
  /// symmetric limiting signature w(x) sampled at x >= 0, used for autocorrelation().
  static FieldModel tabulated(std::vector<double> radii, std::vector<double> values, double width,
                              bool normalize = true,
                              std::optional<PiecewiseLinear> limiting_profile = std::nullopt);

  FieldKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double width() const { return width_; }
  double scale() const { return scale_; }
  const UnderwaterParams& underwater_params() const { return underwater_; }
  bool normalized() const { return normalized_; }

  /// h(d). Throws ErrorKind::Domain for negative or NaN d; zero past the support.
  double eval(double d) const;
  /// h evaluated at the offset between a sensor and a source.
  double energy_at(const Vec2& offset) const;
  /// Distance measure used by energy_at (Euclidean, L1 for the Laplacian field).
  double distance(const Vec2& offset) const;
  /// Radius beyond which h vanishes (infinity for unbounded profiles).
  double support_radius() const;

  bool has_autocorrelation() const;
  /// tau(t) of the limiting signature function, normalized to tau(0) = 1.
  /// Throws ErrorKind::Unsupported when no analytic or tabulated profile exists.
  double autocorrelation(double t) const;

  /// Midpoint-rule value of the integral of h^2 over the L x L area centred on
  /// the source, using `cells` cells per side.
  double energy_integral(int cells = 2048) const;

 private:
  FieldModel() = default;
  double base(double d) const;
  void finish(bool normalize);

  FieldKind kind_ = FieldKind::Gaussian;
  double gamma_ = 0.0;
  double width_ = 1.0;
  double scale_ = 1.0;
  bool normalized_ = false;
  UnderwaterParams underwater_{};
  double multipath_energy_ = 1.0;
  double absorption_ = 1.0;  // linear A(f)
  PiecewiseLinear table_;
  std::optional<PiecewiseLinear> limiting_;
  double limiting_norm_ = 1.0;
};

enum class Placement { UniformRandom, GridJittered };

/// Sensor readings of one campaign.
struct MeasurementSet {
  Points locations;
  std::vector<double> energies;
  double noise_bound = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return locations.size(); }
};

struct SamplingOptions {
  Placement placement = Placement::UniformRandom;
  double noise_variance = 0.0;
  /// Noise is truncated to |n| < bound_sigmas * sigma_n.
  double bound_sigmas = 6.0;
};

/// Draws M sensor locations in the L x L area and records
/// sum_k alpha_k h(d(z, s_k)) + n, clamped at zero. Deterministic in `seed`.
MeasurementSet sample_measurements(const SourceConfig& sources, const FieldModel& model, std::size_t count,
                                   std::uint64_t seed, const SamplingOptions& options = {});

/// Noise-free energy at `z`.
double field_energy(const SourceConfig& sources, const FieldModel& model, const Vec2& z);

}  // namespace umfloc
