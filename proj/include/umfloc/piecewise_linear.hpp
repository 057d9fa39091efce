#pragma once

#include <vector>

namespace umfloc {

/// Continuous piecewise-linear function on [knots.front(), knots.back()], zero
/// outside that interval. Knots must be strictly increasing.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

  double operator()(double x) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  bool empty() const { return knots_.empty(); }
  double lower() const { return knots_.front(); }
  double upper() const { return knots_.back(); }

  /// x -> f(x - offset)
  PiecewiseLinear shifted(double offset) const;
  /// x -> f(t - x)
  PiecewiseLinear reflected(double t) const;
  PiecewiseLinear scaled(double factor) const;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Exact integral of f(x) g(x) over the real line. The product is piecewise
/// quadratic between the merged breakpoints, so Simpson's rule per segment is exact.
double product_integral(const PiecewiseLinear& f, const PiecewiseLinear& g);

}  // namespace umfloc
