#include "umfloc/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "umfloc/error.hpp"
#include "umfloc/search.hpp"

namespace umfloc {

namespace {

PiecewiseLinear make_function(const Eigen::VectorXd& knots, const Eigen::VectorXd& values, double scale) {
  require(knots.size() == values.size() && knots.size() >= 1, ErrorKind::Dimension,
          "profile: knots and values differ in length");
  std::vector<double> k(knots.data(), knots.data() + knots.size());
  std::vector<double> v(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    require(std::isfinite(values(i)), ErrorKind::Domain, "profile: non-finite value");
    v[static_cast<std::size_t>(i)] = std::max(0.0, values(i)) * scale;
  }
  return PiecewiseLinear(std::move(k), std::move(v));
}

double search_tolerance(const InterpolatedProfile& p) {
  return 1e-6 * std::max(p.function().upper() - p.function().lower() + p.spacing(), p.spacing());
}

}  // namespace

InterpolatedProfile::InterpolatedProfile(const Eigen::VectorXd& knots, const Eigen::VectorXd& values, double width)
    : fn_(make_function(knots, values, std::sqrt(static_cast<double>(knots.size()) / width))),
      spacing_(width / static_cast<double>(knots.size())) {
  require(width > 0.0, ErrorKind::Config, "profile: width must be positive");
}

InterpolatedProfile::InterpolatedProfile(PiecewiseLinear fn, double spacing) : fn_(std::move(fn)), spacing_(spacing) {
  require(!fn_.empty(), ErrorKind::Degenerate, "profile: empty function");
  require(spacing > 0.0, ErrorKind::Config, "profile: spacing must be positive");
}

bool InterpolatedProfile::is_zero() const {
  return std::all_of(fn_.values().begin(), fn_.values().end(), [](double v) { return v == 0.0; });
}

double InterpolatedProfile::spread() const {
  const auto& k = fn_.knots();
  const auto& v = fn_.values();
  double w = 0.0, m = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    w += v[i] * v[i];
    m += v[i] * v[i] * k[i];
  }
  if (w == 0.0) return 0.0;
  m /= w;
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += v[i] * v[i] * (k[i] - m) * (k[i] - m);
  return std::sqrt(s / w);
}

double reflected_correlation(const InterpolatedProfile& profile, double t) {
  return product_integral(profile.function(), profile.function().reflected(t));
}

double estimate_symmetry_point(const InterpolatedProfile& profile) {
  require(!profile.is_zero(), ErrorKind::Degenerate, "symmetry point: profile is identically zero");
  const double a = 2.0 * profile.function().lower();
  const double b = 2.0 * profile.function().upper();
  const double t = coarse_then_golden_max([&](double s) { return reflected_correlation(profile, s); }, a, b,
                                          profile.spacing() / 4.0, search_tolerance(profile));
  return t / 2.0;
}

LocationEstimate localize_from_vectors(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const ObservationGrid& grid,
                                       const std::string& method) {
  require(u.size() == grid.size && v.size() == grid.size, ErrorKind::Dimension,
          "localize: vector length differs from grid size");
  const InterpolatedProfile px(grid.cX, v, grid.width);
  const InterpolatedProfile py(grid.cY, u, grid.width);
  LocationEstimate est;
  const double x = estimate_symmetry_point(px);
  const double y = estimate_symmetry_point(py);
  est.peak_x = reflected_correlation(px, 2.0 * x);
  est.peak_y = reflected_correlation(py, 2.0 * y);
  est.position = grid.to_world(Vec2(x, y));
  est.method = method;
  return est;
}

LocationEstimate localize_single(const CompletedMatrix& completed, const ObservationGrid& grid) {
  require(completed.U.cols() >= 1 && completed.V.cols() >= 1, ErrorKind::Degenerate,
          "localize: completion has no singular triple");
  return localize_from_vectors(completed.U.col(0), completed.V.col(0), grid, "symmetry");
}

double separation_objective(const InterpolatedProfile& composite, const InterpolatedProfile& reference,
                            double reference_center, double center, double r, SeparationScore score) {
  const PiecewiseLinear up = reference.function().shifted(center + r - reference_center);
  const PiecewiseLinear down = reference.function().shifted(center - r - reference_center);
  const double inner = product_integral(composite.function(), up) + product_integral(composite.function(), down);
  if (score == SeparationScore::Literal) return 0.5 * inner;
  const double norm2 = product_integral(up, up) + product_integral(down, down) + 2.0 * product_integral(up, down);
  return norm2 > 0.0 ? inner / std::sqrt(norm2) : 0.0;
}

Separation separate_two_sources(const InterpolatedProfile& composite, const InterpolatedProfile& single,
                                SeparationScore score) {
  require(!composite.is_zero() && !single.is_zero(), ErrorKind::Degenerate, "separation: degenerate profile");
  Separation s;
  s.shared = estimate_symmetry_point(single);
  s.center = estimate_symmetry_point(composite);
  const double span = composite.function().upper() - composite.function().lower() + composite.spacing();
  const double r_max = span / 4.0;
  s.half_separation = coarse_then_golden_max(
      [&](double r) { return separation_objective(composite, single, s.shared, s.center, r, score); }, 0.0, r_max,
      composite.spacing() / 4.0, search_tolerance(composite));
  return s;
}

std::pair<Vec2, Vec2> localize_two_sources(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                           const ObservationGrid& grid, SeparationScore score) {
  require(u.size() == grid.size && v.size() == grid.size, ErrorKind::Dimension,
          "localize: vector length differs from grid size");
  const InterpolatedProfile px(grid.cX, v, grid.width);
  const InterpolatedProfile py(grid.cY, u, grid.width);
  if (py.spread() >= px.spread()) {
    const Separation s = separate_two_sources(py, px, score);
    const auto [a, b] = s.points();
    return {grid.to_world(a), grid.to_world(b)};
  }
  const Separation s = separate_two_sources(px, py, score);
  const auto [a, b] = s.points();
  return {grid.to_world(Vec2(a.y(), a.x())), grid.to_world(Vec2(b.y(), b.x()))};
}

}  // namespace umfloc
