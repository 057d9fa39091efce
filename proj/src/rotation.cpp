#include "umfloc/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "umfloc/error.hpp"
#include "umfloc/grid.hpp"
#include "umfloc/search.hpp"

namespace umfloc {

namespace {

constexpr double kQuarter = kPi / 2.0;

double reduce_quarter(double theta) {
  double r = std::fmod(theta, kQuarter);
  if (r < 0.0) r += kQuarter;
  if (r >= kQuarter) r -= kQuarter;
  return r;
}

// Number of sign changes of the circular first differences, ignoring zeros.
int circular_sign_changes(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<int> signs;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = values[(k + 1) % n] - values[k];
    if (d > 0.0) signs.push_back(1);
    if (d < 0.0) signs.push_back(-1);
  }
  int changes = 0;
  for (std::size_t k = 0; k < signs.size(); ++k)
    if (signs[k] != signs[(k + 1) % signs.size()]) ++changes;
  return changes;
}

}  // namespace

const char* to_string(RotationMode mode) noexcept {
  return mode == RotationMode::AlignMax ? "align-max" : "separate-min";
}

double spectral_concentration(const Eigen::VectorXd& sigma) {
  const double total = sigma.squaredNorm();
  if (total == 0.0) return 0.0;
  return sigma.maxCoeff() * sigma.maxCoeff() / total;
}

double rho(const MeasurementSet& ms, int size, double width, double theta, const CompletionConfig& cfg) {
  const ObservationGrid g = build_grid(ms, size, width, theta);
  return spectral_concentration(complete(g, cfg).values);
}

RhoFunction measurement_rho(const MeasurementSet& ms, int size, double width, const CompletionConfig& cfg) {
  return [&ms, size, width, cfg](double theta) { return rho(ms, size, width, theta, cfg); };
}

RhoFunction exact_rho(const SourceConfig& sources, const FieldModel& model, int size, double width) {
  return [sources, model, size, width](double theta) {
    const Eigen::MatrixXd H = exact_signature_matrix(sources, model, size, width, theta).aggregate;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(H);
    return spectral_concentration(svd.singularValues());
  };
}

RotationProfile find_rotation(const RhoFunction& f, RotationMode mode, const RotationOptions& options) {
  require(options.coarse_step > 0.0 && options.tolerance > 0.0, ErrorKind::Config, "rotation: invalid options");
  RotationProfile p;
  p.mode = mode;
  const double sign = mode == RotationMode::AlignMax ? 1.0 : -1.0;

  std::vector<std::pair<double, double>> samples;
  auto eval = [&](double theta) {
    const double r = f(reduce_quarter(theta));
    samples.emplace_back(reduce_quarter(theta), r);
    return sign * r;
  };

  const int coarse = std::max(2, static_cast<int>(std::lround(kQuarter / options.coarse_step)));
  const double step = kQuarter / coarse;
  std::vector<double> scan(static_cast<std::size_t>(coarse));
  for (int k = 0; k < coarse; ++k) scan[static_cast<std::size_t>(k)] = eval(k * step);
  const auto best = std::max_element(scan.begin(), scan.end());  // first maximum
  const double theta_c = step * static_cast<double>(best - scan.begin());
  const auto [lo, hi] = std::minmax_element(scan.begin(), scan.end());
  p.flat = (*hi - *lo) < options.flat_spread;

  double theta_star = theta_c;
  double a = theta_c - step, b = theta_c + step;
  if (mode == RotationMode::AlignMax && circular_sign_changes(scan) <= 2) {
    a = theta_c - kQuarter / 2.0;
    b = theta_c + kQuarter / 2.0;
  } else {
    p.fallback = mode == RotationMode::AlignMax;
  }
  const double refined = golden_section_max(eval, a, b, options.tolerance);
  if (eval(refined) > *best) theta_star = refined;

  p.best_theta = reduce_quarter(theta_star);
  p.best_rho = f(p.best_theta);
  std::sort(samples.begin(), samples.end());
  for (const auto& [t, r] : samples) {
    p.thetas.push_back(t);
    p.rho.push_back(r);
  }
  return p;
}

RotationProfile find_rotation(const MeasurementSet& ms, int size, double width, const CompletionConfig& cfg,
                              RotationMode mode, const RotationOptions& options) {
  return find_rotation(measurement_rho(ms, size, width, cfg), mode, options);
}

bool satisfies_correlation_condition(const std::function<double(double)>& tau, double t_max, int samples) {
  require(t_max > 0.0 && samples >= 2, ErrorKind::Config, "condition check: invalid sampling");
  const double h = 1e-6 * t_max;
  auto deriv = [&](double t) { return (tau(t + h) - tau(t - h)) / (2.0 * h); };
  std::vector<double> ts(static_cast<std::size_t>(samples)), ds(ts.size());
  for (int k = 0; k < samples; ++k) {
    ts[static_cast<std::size_t>(k)] = t_max * (k + 1) / samples;
    ds[static_cast<std::size_t>(k)] = deriv(ts[static_cast<std::size_t>(k)]);
  }
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i + 1; j < ts.size(); ++j)
      if (!(ts[i] * ds[j] > ts[j] * ds[i])) return false;
  return true;
}

int count_flank_violations(const std::vector<double>& thetas, const std::vector<double>& rho, double theta_star,
                           double tolerance) {
  require(thetas.size() == rho.size(), ErrorKind::Dimension, "flank check: length mismatch");
  // Signed offsets from theta_star on the pi/2 circle, in (-pi/4, pi/4].
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    double d = std::fmod(thetas[k] - theta_star, kQuarter);
    if (d > kQuarter / 2.0) d -= kQuarter;
    if (d <= -kQuarter / 2.0) d += kQuarter;
    pts.emplace_back(d, rho[k]);
  }
  std::sort(pts.begin(), pts.end());
  int violations = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double d0 = pts[k].first, d1 = pts[k + 1].first;
    const double diff = pts[k + 1].second - pts[k].second;
    if (d1 <= 0.0 && diff < -tolerance) ++violations;
    if (d0 >= 0.0 && diff > tolerance) ++violations;
  }
  return violations;
}

void write_rotation_profile(const RotationProfile& profile, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "theta_deg,rho\n" << std::setprecision(17);
  for (std::size_t k = 0; k < profile.thetas.size(); ++k) out << rad2deg(profile.thetas[k]) << ',' << profile.rho[k] << '\n';
}

}  // namespace umfloc
