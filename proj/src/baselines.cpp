#include "umfloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "umfloc/error.hpp"

namespace umfloc {

LocationEstimate naive_localize(const MeasurementSet& ms) {
  require(ms.size() >= 1, ErrorKind::Config, "naive: no measurements");
  require(ms.locations.size() == ms.energies.size(), ErrorKind::Dimension, "naive: length mismatch");
  std::size_t best = 0;
  for (std::size_t m = 1; m < ms.size(); ++m)
    if (ms.energies[m] > ms.energies[best]) best = m;
  LocationEstimate e;
  e.position = ms.locations[best];
  e.method = "naive";
  return e;
}

LocationEstimate wcl_localize(const MeasurementSet& ms, std::size_t window_size, double width,
                              const WclOptions& options) {
  require(ms.size() >= 4, ErrorKind::Config, "wcl: need at least 4 measurements");
  require(window_size >= 1 && window_size <= ms.size(), ErrorKind::Config, "wcl: window size out of range");
  require(width > 0.0, ErrorKind::Config, "wcl: width must be positive");

  Vec2 s = naive_localize(ms).position;
  std::vector<double> dist(ms.size());
  for (int it = 0; it < options.max_iterations; ++it) {
    for (std::size_t m = 0; m < ms.size(); ++m) dist[m] = (ms.locations[m] - s).norm();
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(window_size - 1), sorted.end());
    const double radius = std::max(width / 8.0, sorted[window_size - 1]);

    Vec2 num = Vec2::Zero(), plain = Vec2::Zero();
    double den = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < ms.size(); ++m) {
      if (dist[m] > radius) continue;
      const double w = ms.energies[m] * ms.energies[m];
      num += w * ms.locations[m];
      den += w;
      plain += ms.locations[m];
      ++count;
    }
    const Vec2 next = den > 0.0 ? Vec2(num / den) : Vec2(plain / static_cast<double>(count));
    const double move = (next - s).norm();
    s = next;
    if (move < options.tolerance * width) break;
  }
  LocationEstimate e;
  e.position = s;
  e.method = "wcl";
  return e;
}

const char* to_string(KernelKind kind) noexcept { return kind == KernelKind::Gaussian ? "gaussian" : "laplacian"; }

double kernel_value(KernelKind kind, double lambda, const Vec2& z, const Vec2& center) {
  const Vec2 d = z - center;
  if (kind == KernelKind::Gaussian) return std::exp(-lambda * d.squaredNorm());
  return std::exp(-lambda * (std::abs(d.x()) + std::abs(d.y())));
}

namespace {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

Split split_measurements(const MeasurementSet& ms, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(ms.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Canonical order first, so the split depends on the data and not on its ordering.
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const Vec2& pa = ms.locations[a];
    const Vec2& pb = ms.locations[b];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return ms.energies[a] < ms.energies[b];
  });
  std::mt19937_64 rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
  auto n_train = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
  return {{idx.begin(), idx.begin() + static_cast<long>(n_train)}, {idx.begin() + static_cast<long>(n_train), idx.end()}};
}

struct Problem {
  KernelKind kind;
  Eigen::MatrixX2d z;
  Eigen::VectorXd h;
  std::size_t K;
};

Problem make_problem(const MeasurementSet& ms, const std::vector<std::size_t>& rows, KernelKind kind, std::size_t K) {
  Problem p{kind, Eigen::MatrixX2d(static_cast<Eigen::Index>(rows.size()), 2),
            Eigen::VectorXd(static_cast<Eigen::Index>(rows.size())), K};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    p.z.row(static_cast<Eigen::Index>(r)) = ms.locations[rows[r]].transpose();
    p.h(static_cast<Eigen::Index>(r)) = ms.energies[rows[r]];
  }
  return p;
}

// Parameters: (c_1x, c_1y, ..., c_Kx, c_Ky, log lambda).
Eigen::MatrixXd design(const Problem& p, const Eigen::VectorXd& theta) {
  const double lambda = std::exp(theta(theta.size() - 1));
  Eigen::MatrixXd B(p.z.rows(), static_cast<Eigen::Index>(p.K));
  for (Eigen::Index m = 0; m < p.z.rows(); ++m)
    for (std::size_t k = 0; k < p.K; ++k) {
      const Vec2 c(theta(2 * static_cast<Eigen::Index>(k)), theta(2 * static_cast<Eigen::Index>(k) + 1));
      B(m, static_cast<Eigen::Index>(k)) = kernel_value(p.kind, lambda, p.z.row(m).transpose(), c);
    }
  return B;
}

Eigen::VectorXd solve_weights(const Eigen::MatrixXd& B, const Eigen::VectorXd& h) {
  return B.colPivHouseholderQr().solve(h);
}

struct Evaluation {
  Eigen::MatrixXd B;
  Eigen::VectorXd alpha;
  Eigen::VectorXd r;
  double loss;
};

Evaluation evaluate(const Problem& p, const Eigen::VectorXd& theta) {
  Evaluation e;
  e.B = design(p, theta);
  e.alpha = solve_weights(e.B, p.h);
  e.r = p.h - e.B * e.alpha;
  e.loss = e.r.squaredNorm() / static_cast<double>(p.h.size());
  if (!std::isfinite(e.loss)) e.loss = std::numeric_limits<double>::infinity();
  return e;
}

// Jacobian of the residual with the weights held at their optimum.
Eigen::MatrixXd residual_jacobian(const Problem& p, const Eigen::VectorXd& theta, const Evaluation& e) {
  const double lambda = std::exp(theta(theta.size() - 1));
  const auto K = static_cast<Eigen::Index>(p.K);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p.z.rows(), theta.size());
  for (Eigen::Index m = 0; m < p.z.rows(); ++m) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double dx = p.z(m, 0) - theta(2 * k);
      const double dy = p.z(m, 1) - theta(2 * k + 1);
      const double b = e.B(m, k) * e.alpha(k);
      if (p.kind == KernelKind::Gaussian) {
        J(m, 2 * k) = -b * 2.0 * lambda * dx;
        J(m, 2 * k + 1) = -b * 2.0 * lambda * dy;
        J(m, 2 * K) += b * lambda * (dx * dx + dy * dy);
      } else {
        J(m, 2 * k) = -b * lambda * ((dx > 0.0) - (dx < 0.0));
        J(m, 2 * k + 1) = -b * lambda * ((dy > 0.0) - (dy < 0.0));
        J(m, 2 * K) += b * lambda * (std::abs(dx) + std::abs(dy));
      }
    }
  }
  return J;
}

struct Run {
  Eigen::VectorXd theta;
  double loss;
  std::vector<double> trace;
};

Run levenberg_marquardt(const Problem& p, Eigen::VectorXd theta, int max_iterations) {
  Evaluation e = evaluate(p, theta);
  Run run{theta, e.loss, {e.loss}};
  if (!std::isfinite(e.loss)) return run;
  double mu = 1e-3;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::MatrixXd J = residual_jacobian(p, theta, e);
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * e.r;
    bool accepted = false;
    for (int k = 0; k < 30 && !accepted; ++k) {
      Eigen::MatrixXd damped = A;
      damped.diagonal() += mu * (A.diagonal().array() + 1e-12).matrix();
      const Eigen::VectorXd step = -damped.ldlt().solve(g);
      if (!step.allFinite()) {
        mu *= 4.0;
        continue;
      }
      const Eigen::VectorXd cand = theta + step;
      Evaluation ec = evaluate(p, cand);
      if (ec.loss < e.loss) {
        const double gain = (e.loss - ec.loss) / std::max(e.loss, 1e-300);
        theta = cand;
        e = std::move(ec);
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        run.trace.push_back(e.loss);
        if (gain < 1e-12) it = max_iterations;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) break;
  }
  run.theta = theta;
  run.loss = e.loss;
  return run;
}

double median_pair_distance(const Problem& p) {
  std::vector<double> d;
  const Eigen::Index n = p.z.rows();
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((p.z.row(i) - p.z.row(j)).norm());
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
  return std::max(d[d.size() / 2], 1e-9);
}

Eigen::VectorXd initial_parameters(const Problem& p, double lambda0, int restart, std::mt19937_64& rng) {
  const auto K = static_cast<Eigen::Index>(p.K);
  Eigen::VectorXd theta(2 * K + 1);
  const Eigen::Vector2d lo = p.z.colwise().minCoeff().transpose();
  const Eigen::Vector2d hi = p.z.colwise().maxCoeff().transpose();
  if (restart == 0) {
    // Strongest readings, skipping ones too close to an already chosen centre.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p.h.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return p.h(a) > p.h(b); });
    const double gap = 0.1 * (hi - lo).norm();
    Eigen::Index chosen = 0;
    for (Eigen::Index m : order) {
      if (chosen == K) break;
      bool ok = true;
      for (Eigen::Index k = 0; k < chosen; ++k)
        if ((p.z.row(m).transpose() - Eigen::Vector2d(theta(2 * k), theta(2 * k + 1))).norm() < gap) ok = false;
      if (!ok) continue;
      theta(2 * chosen) = p.z(m, 0);
      theta(2 * chosen + 1) = p.z(m, 1);
      ++chosen;
    }
    for (Eigen::Index m = 0; chosen < K; ++m, ++chosen) {
      theta(2 * chosen) = p.z(order[static_cast<std::size_t>(m)], 0);
      theta(2 * chosen + 1) = p.z(order[static_cast<std::size_t>(m)], 1);
    }
  } else {
    std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
    for (Eigen::Index k = 0; k < K; ++k) {
      theta(2 * k) = ux(rng);
      theta(2 * k + 1) = uy(rng);
    }
  }
  theta(2 * K) = std::log(lambda0);
  return theta;
}

}  // namespace

KernelFit fit_kernel(const MeasurementSet& ms, std::size_t sources, KernelKind kind, const KernelOptions& options) {
  require(ms.size() >= 10, ErrorKind::Config, "kernel: need at least 10 measurements");
  require(sources >= 1, ErrorKind::Config, "kernel: K must be >= 1");
  require(options.restarts >= 1 && options.max_iterations >= 1, ErrorKind::Config, "kernel: invalid options");
  require(options.train_fraction > 0.0 && options.train_fraction < 1.0, ErrorKind::Config,
          "kernel: train fraction must lie in (0, 1)");

  const Split split = split_measurements(ms, options.train_fraction, options.seed);
  const Problem train = make_problem(ms, split.train, kind, sources);
  const Problem valid = make_problem(ms, split.validation, kind, sources);

  const double dmed = median_pair_distance(train);
  const double lambda0 = kind == KernelKind::Gaussian ? 1.0 / (2.0 * dmed * dmed) : 1.0 / dmed;

  std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                    static_cast<std::uint32_t>(kind == KernelKind::Gaussian ? 1 : 2)};
  std::mt19937_64 rng(seq);

  Run best{{}, std::numeric_limits<double>::infinity(), {}};
  for (int r = 0; r < options.restarts; ++r) {
    Run run = levenberg_marquardt(train, initial_parameters(train, lambda0, r, rng), options.max_iterations);
    if (std::isfinite(run.loss) && run.loss < best.loss) best = std::move(run);
  }
  require(std::isfinite(best.loss), ErrorKind::Solver, "kernel: every restart diverged");

  KernelFit fit;
  fit.kind = kind;
  fit.lambda = std::exp(best.theta(best.theta.size() - 1));
  const Eigen::VectorXd alpha = solve_weights(design(train, best.theta), train.h);
  for (std::size_t k = 0; k < sources; ++k) {
    fit.centers.emplace_back(best.theta(2 * static_cast<Eigen::Index>(k)), best.theta(2 * static_cast<Eigen::Index>(k) + 1));
    fit.weights.push_back(alpha(static_cast<Eigen::Index>(k)));
  }
  fit.training_loss = best.loss;
  fit.validation_loss = (valid.h - design(valid, best.theta) * alpha).squaredNorm() / static_cast<double>(valid.h.size());
  fit.loss_trace = std::move(best.trace);
  return fit;
}

std::pair<Points, KernelFit> kernel_localize(const MeasurementSet& ms, std::size_t sources,
                                             const KernelOptions& options) {
  KernelFit g = fit_kernel(ms, sources, KernelKind::Gaussian, options);
  KernelFit l = fit_kernel(ms, sources, KernelKind::Laplacian, options);
  KernelFit& chosen = l.validation_loss < g.validation_loss ? l : g;
  Points centers = chosen.centers;
  return {std::move(centers), std::move(chosen)};
}

}  // namespace umfloc
