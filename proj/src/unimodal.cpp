#include "umfloc/unimodal.hpp"

#include <vector>

namespace umfloc {

namespace {

struct Pool {
  double sum;
  double count;
  double sse;         // within-pool squared deviation from the pool mean
  double cumulative;  // projection cost of this pool and every pool below it

  double mean() const { return sum / count; }
  double cost() const {
    const double m = mean();
    return m >= 0.0 ? sse : sse + count * m * m;
  }
};

// Online non-decreasing PAVA. Pools merge only on strict violations so that an
// already monotone input is reproduced bit-for-bit.
class AscendingPava {
 public:
  explicit AscendingPava(std::size_t capacity) { pools_.reserve(capacity); }

  void push(double value) {
    Pool top{value, 1.0, 0.0, 0.0};
    while (!pools_.empty() && pools_.back().mean() > top.mean()) {
      const Pool& below = pools_.back();
      const double d = below.mean() - top.mean();
      top.sse = below.sse + top.sse + below.count * top.count / (below.count + top.count) * d * d;
      top.sum += below.sum;
      top.count += below.count;
      pools_.pop_back();
    }
    top.cumulative = (pools_.empty() ? 0.0 : pools_.back().cumulative) + top.cost();
    pools_.push_back(top);
  }

  double cost() const { return pools_.empty() ? 0.0 : pools_.back().cumulative; }

  void write(double* out) const {
    for (const Pool& p : pools_) {
      const double v = p.mean() > 0.0 ? p.mean() : 0.0;
      const auto n = static_cast<std::size_t>(p.count);
      for (std::size_t i = 0; i < n; ++i) *out++ = v;
    }
  }

 private:
  std::vector<Pool> pools_;
};

void fit_ascending(const double* x, Eigen::Index n, double* out) {
  AscendingPava pava(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pava.push(x[i]);
  pava.write(out);
}

}  // namespace

Eigen::VectorXd project_isotonic_nonneg(const Eigen::Ref<const Eigen::VectorXd>& x, Direction direction) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd out(n);
  if (n == 0) return out;
  if (direction == Direction::NonDecreasing) {
    Eigen::VectorXd tmp = x;
    fit_ascending(tmp.data(), n, out.data());
  } else {
    Eigen::VectorXd rev = x.reverse();
    Eigen::VectorXd fitted(n);
    fit_ascending(rev.data(), n, fitted.data());
    out = fitted.reverse();
  }
  return out;
}

UnimodalVector project_unimodal(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size();
  UnimodalVector result;
  result.values = Eigen::VectorXd::Zero(n);
  if (n == 0) return result;

  const Eigen::VectorXd xs = x;
  const Eigen::VectorXd rev = x.reverse();

  // ascending[s]: cost of the first s entries on the ascending cone.
  // descending[t]: cost of the last t entries on the descending cone.
  std::vector<double> ascending(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> descending(static_cast<std::size_t>(n) + 1, 0.0);
  {
    AscendingPava up(static_cast<std::size_t>(n)), down(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      up.push(xs(i));
      ascending[static_cast<std::size_t>(i) + 1] = up.cost();
      down.push(rev(i));
      descending[static_cast<std::size_t>(i) + 1] = down.cost();
    }
  }

  Eigen::Index best_split = 1;
  double best_cost = ascending[1] + descending[static_cast<std::size_t>(n - 1)];
  for (Eigen::Index s = 3; s <= n; s += 2) {
    const double c = ascending[static_cast<std::size_t>(s)] + descending[static_cast<std::size_t>(n - s)];
    if (c < best_cost) {
      best_cost = c;
      best_split = s;
    }
  }

  fit_ascending(xs.data(), best_split, result.values.data());
  const Eigen::Index tail = n - best_split;
  if (tail > 0) {
    Eigen::VectorXd fitted(tail);
    fit_ascending(rev.data(), tail, fitted.data());
    result.values.tail(tail) = fitted.reverse();
  }
  result.values.maxCoeff(&result.peak);
  result.split = best_split;
  return result;
}

Eigen::MatrixXd project_unimodal_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X) {
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index k = 0; k < X.cols(); ++k) out.col(k) = project_unimodal(X.col(k)).values;
  return out;
}

bool is_unimodal(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index n = v.size();
  if (n == 0) return true;
  if ((v.array() < 0.0).any()) return false;
  Eigen::Index peak = 0;
  v.maxCoeff(&peak);
  for (Eigen::Index i = 0; i < peak; ++i)
    if (v(i) > v(i + 1)) return false;
  for (Eigen::Index i = peak; i + 1 < n; ++i)
    if (v(i) < v(i + 1)) return false;
  return true;
}

}  // namespace umfloc
