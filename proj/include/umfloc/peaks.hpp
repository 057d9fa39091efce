#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "umfloc/geometry.hpp"
#include "umfloc/grid.hpp"
#include "umfloc/lowrank.hpp"
#include "umfloc/piecewise_linear.hpp"

namespace umfloc {

/// Piecewise-linear interpolation of a signature vector over cell centres,
/// values scaled by sqrt(N/L) with negative entries clamped to zero.
class InterpolatedProfile {
 public:
  InterpolatedProfile(const Eigen::VectorXd& knots, const Eigen::VectorXd& values, double width);
  /// Wraps an arbitrary function; `spacing` sets the coarse search resolution.
  InterpolatedProfile(PiecewiseLinear fn, double spacing);

  const PiecewiseLinear& function() const { return fn_; }
  double spacing() const { return spacing_; }
  double operator()(double x) const { return fn_(x); }
  bool is_zero() const;
  /// Root-mean-square spread of the squared profile about its centroid.
  double spread() const;

 private:
  PiecewiseLinear fn_;
  double spacing_;
};

/// R(t) = integral of p(x) p(t - x), exact for piecewise-linear p.
double reflected_correlation(const InterpolatedProfile& profile, double t);

/// Half the maximizer of R over [2 knot_1, 2 knot_N].
double estimate_symmetry_point(const InterpolatedProfile& profile);

struct LocationEstimate {
  Vec2 position = Vec2::Zero();
  double peak_x = 0.0;  // max R along the x axis
  double peak_y = 0.0;
  std::string method;
};

/// Location from the dominant right (x) and left (y) vectors, mapped to world coordinates.
LocationEstimate localize_from_vectors(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const ObservationGrid& grid,
                                       const std::string& method = "symmetry");
LocationEstimate localize_single(const CompletedMatrix& completed, const ObservationGrid& grid);

enum class SeparationScore {
  Normalized,  // <u, T_r> / ||T_r|| with T_r the two-bump template
  Literal,     // Q(r) = 1/2 <u, T_r>
};

/// Q(r) for a composite profile against a reference bump centred at `reference_center`.
double separation_objective(const InterpolatedProfile& composite, const InterpolatedProfile& reference,
                            double reference_center, double center, double r,
                            SeparationScore score = SeparationScore::Literal);

struct Separation {
  double shared = 0.0;  // coordinate along the single-bump axis
  double center = 0.0;
  double half_separation = 0.0;
  /// (shared, center + r) and (shared, center - r), in the (single, composite) axis order.
  std::pair<Vec2, Vec2> points() const {
    return {Vec2(shared, center + half_separation), Vec2(shared, center - half_separation)};
  }
};

/// Two equal-power sources sharing one coordinate: `single` is the profile
/// along the shared axis, `composite` the two-bump profile along the other.
Separation separate_two_sources(const InterpolatedProfile& composite, const InterpolatedProfile& single,
                                SeparationScore score = SeparationScore::Normalized);

/// Picks the wider of the two dominant vectors as the composite axis and
/// returns both world-coordinate estimates.
std::pair<Vec2, Vec2> localize_two_sources(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                           const ObservationGrid& grid,
                                           SeparationScore score = SeparationScore::Normalized);

}  // namespace umfloc
