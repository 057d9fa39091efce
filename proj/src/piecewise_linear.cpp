#include "umfloc/piecewise_linear.hpp"

#include <algorithm>
#include <cmath>

#include "umfloc/error.hpp"

namespace umfloc {

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  require(knots_.size() == values_.size(), ErrorKind::Dimension,
          "piecewise-linear: knots and values differ in length");
  require(!knots_.empty(), ErrorKind::Config, "piecewise-linear: no knots");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    require(knots_[i] > knots_[i - 1], ErrorKind::Config,
            "piecewise-linear: knots must be strictly increasing");
}

double PiecewiseLinear::operator()(double x) const {
  if (knots_.empty() || x < knots_.front() || x > knots_.back()) return 0.0;
  if (knots_.size() == 1) return values_.front();
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.end()) return values_.back();
  const auto hi = static_cast<std::size_t>(it - knots_.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
  return (1.0 - w) * values_[lo] + w * values_[hi];
}

PiecewiseLinear PiecewiseLinear::shifted(double offset) const {
  std::vector<double> k(knots_);
  for (double& x : k) x += offset;
  return {std::move(k), values_};
}

PiecewiseLinear PiecewiseLinear::reflected(double t) const {
  std::vector<double> k(knots_.rbegin(), knots_.rend());
  for (double& x : k) x = t - x;
  return {std::move(k), std::vector<double>(values_.rbegin(), values_.rend())};
}

PiecewiseLinear PiecewiseLinear::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& y : v) y *= factor;
  return {knots_, std::move(v)};
}

double product_integral(const PiecewiseLinear& f, const PiecewiseLinear& g) {
  if (f.empty() || g.empty()) return 0.0;
  const double lo = std::max(f.lower(), g.lower());
  const double hi = std::min(f.upper(), g.upper());
  if (!(hi > lo)) return 0.0;

  const auto& a = f.knots();
  const auto& b = g.knots();
  std::vector<double> xs;
  xs.reserve(a.size() + b.size() + 2);
  xs.push_back(lo);
  std::size_t i = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), lo) - a.begin());
  std::size_t j = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), lo) - b.begin());
  while (true) {
    const double xa = i < a.size() ? a[i] : hi;
    const double xb = j < b.size() ? b[j] : hi;
    const double x = std::min({xa, xb, hi});
    if (x >= hi) break;
    xs.push_back(x);
    if (xa <= x) ++i;
    if (xb <= x) ++j;
  }
  xs.push_back(hi);

  // Tiny segments produced by near-coincident knots contribute O(width) and are harmless.
  double total = 0.0;
  double f0 = f(xs[0]), g0 = g(xs[0]);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const double x0 = xs[k - 1], x1 = xs[k];
    const double f1 = f(x1), g1 = g(x1);
    const double mid = 0.5 * (x0 + x1);
    const double fm = f(mid), gm = g(mid);
    total += (x1 - x0) / 6.0 * (f0 * g0 + 4.0 * fm * gm + f1 * g1);
    f0 = f1;
    g0 = g1;
  }
  return total;
}

}  // namespace umfloc
