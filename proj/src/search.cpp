#include "umfloc/search.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "umfloc/error.hpp"

namespace umfloc {

double golden_section_max(const ScalarFunction& f, double a, double b, double tol) {
  require(a <= b && tol > 0.0, ErrorKind::Domain, "golden section: invalid bracket");
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

double coarse_then_golden_max(const ScalarFunction& f, double a, double b, double step, double tol) {
  require(a <= b && step > 0.0, ErrorKind::Domain, "search: invalid interval");
  const auto n = static_cast<long>(std::ceil((b - a) / step - 1e-9));
  double best_t = a;
  double best_f = f(a);
  for (long k = 1; k <= n; ++k) {
    const double t = std::min(b, a + static_cast<double>(k) * step);
    const double v = f(t);
    if (v > best_f) {
      best_f = v;
      best_t = t;
    }
  }
  const double lo = std::max(a, best_t - step);
  const double hi = std::min(b, best_t + step);
  if (hi - lo <= tol) return best_t;
  const double refined = golden_section_max(f, lo, hi, tol);
  const double fr = f(refined);
  if (fr > best_f + 1e-12 * std::abs(best_f) || (fr == best_f && refined < best_t)) return refined;
  return best_t;
}

}  // namespace umfloc
