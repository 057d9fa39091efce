#pragma once

#include <functional>

namespace umfloc {

using ScalarFunction = std::function<double(double)>;

/// Golden-section maximization of f on [a, b] until b - a < tol.
double golden_section_max(const ScalarFunction& f, double a, double b, double tol);

/// Maximizes f on [a, b]: scan at spacing `step` (endpoints included), then
/// golden-section refinement on the bracket around the best sample. The
/// refined point replaces the sample only if strictly better; ties prefer the
/// smaller argument.
double coarse_then_golden_max(const ScalarFunction& f, double a, double b, double step, double tol);

}  // namespace umfloc
