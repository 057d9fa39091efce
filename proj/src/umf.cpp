#include "umfloc/umf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>

#include "umfloc/error.hpp"
#include "umfloc/unimodal.hpp"

namespace umfloc {

void UmfConfig::validate() const {
  require(factors >= 1, ErrorKind::Config, "umf: K must be >= 1");
  require(restarts >= 1, ErrorKind::Config, "umf: restarts must be >= 1");
  require(max_iterations >= 1, ErrorKind::Config, "umf: max_iterations must be >= 1");
  require(shrink > 0.0 && shrink < 1.0, ErrorKind::Config, "umf: shrink must lie in (0, 1)");
  require(sufficient_decrease > 0.0 && sufficient_decrease < 1.0, ErrorKind::Config,
          "umf: sufficient decrease constant must lie in (0, 1)");
  require(initial_step >= 0.0, ErrorKind::Config, "umf: initial step must be >= 0");
  require(tolerance >= 0.0 && patience >= 1, ErrorKind::Config, "umf: invalid stop rule");
}

int UmfSolution::iterations_to(double threshold) const {
  for (std::size_t t = 0; t < trace.size(); ++t)
    if (trace[t] <= threshold) return static_cast<int>(t);
  return -1;
}

namespace {

void check_shapes(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const Eigen::MatrixXd& U,
                  const Eigen::MatrixXd& V) {
  require(H.rows() == W.rows() && H.cols() == W.cols(), ErrorKind::Dimension, "umf: H and W differ in shape");
  require(U.rows() == H.rows() && V.rows() == H.cols() && U.cols() == V.cols(), ErrorKind::Dimension,
          "umf: factor shapes do not conform to H");
}

Eigen::MatrixXd weighted_residual(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const Eigen::MatrixXd& U,
                                  const Eigen::MatrixXd& V) {
  return (W.array() * (U * V.transpose() - H).array()).matrix();
}

double objective(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const Eigen::MatrixXd& U,
                 const Eigen::MatrixXd& V) {
  return weighted_residual(H, W, U, V).squaredNorm();
}

struct LineSearch {
  double shrink;
  double c;
  double fixed_step;
};

// One projected gradient step on A with B held fixed, where f = ||W o (H - A B^T)||^2
// (the V step passes the transposed problem). Returns the new objective.
double projected_step(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, Eigen::MatrixXd& A,
                      const Eigen::MatrixXd& B, double f, const LineSearch& ls) {
  const Eigen::MatrixXd G = 2.0 * weighted_residual(H, W, A, B) * B;
  const double bn = B.squaredNorm();
  if (bn == 0.0 || G.squaredNorm() == 0.0) return f;
  double step = ls.fixed_step > 0.0 ? ls.fixed_step : 1.0 / bn;
  for (int k = 0; k < 60; ++k, step *= ls.shrink) {
    Eigen::MatrixXd trial = project_unimodal_matrix(A - step * G);
    const double ft = objective(H, W, trial, B);
    const double decrease = (G.array() * (trial - A).array()).sum();
    if (ft <= f + ls.c * decrease && ft <= f) {
      A.swap(trial);
      return ft;
    }
  }
  return f;
}

UmfSolution run_once(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const Eigen::MatrixXd& Ht,
                     const Eigen::MatrixXd& Wt, const UmfConfig& cfg, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int K = cfg.factors;
  Eigen::MatrixXd U(H.rows(), K), V(H.cols(), K);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index i = 0; i < U.rows(); ++i) U(i, k) = unif(rng);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index i = 0; i < V.rows(); ++i) V(i, k) = unif(rng);
  U = project_unimodal_matrix(U);
  V = project_unimodal_matrix(V);

  const double data = (W.array() * H.array()).matrix().norm();
  const double model = (W.array() * (U * V.transpose()).array()).matrix().norm();
  if (data > 0.0 && model > 0.0) {
    const double s = std::sqrt(data / model);
    U *= s;
    V *= s;
  }

  const LineSearch ls{cfg.shrink, cfg.sufficient_decrease, cfg.initial_step};
  UmfSolution sol;
  sol.restart = restart;
  double f = objective(H, W, U, V);
  sol.trace.push_back(f);
  int quiet = 0;
  int it = 0;
  while (it < cfg.max_iterations && f > 0.0) {
    ++it;
    const double before = f;
    f = projected_step(H, W, U, V, f, ls);
    f = projected_step(Ht, Wt, V, U, f, ls);
    sol.trace.push_back(f);
    const double rel = (before - f) / std::max(before, 1e-300);
    quiet = rel < cfg.tolerance ? quiet + 1 : 0;
    if (quiet >= cfg.patience) break;
  }
  sol.U = std::move(U);
  sol.V = std::move(V);
  sol.objective = f;
  sol.iterations = it;
  return sol;
}

void normalize_and_sort(UmfSolution& sol) {
  const Eigen::Index K = sol.U.cols();
  for (Eigen::Index k = 0; k < K; ++k) {
    const double n = sol.U.col(k).norm();
    if (n > 0.0) {
      sol.U.col(k) /= n;
      sol.V.col(k) *= n;
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::Index> vpeak(order.size()), upeak(order.size());
  for (Eigen::Index k = 0; k < K; ++k) {
    sol.V.col(k).maxCoeff(&vpeak[static_cast<std::size_t>(k)]);
    sol.U.col(k).maxCoeff(&upeak[static_cast<std::size_t>(k)]);
  }
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
    if (vpeak[ia] != vpeak[ib]) return vpeak[ia] < vpeak[ib];
    return upeak[ia] < upeak[ib];
  });
  Eigen::MatrixXd U(sol.U.rows(), K), V(sol.V.rows(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    U.col(k) = sol.U.col(order[static_cast<std::size_t>(k)]);
    V.col(k) = sol.V.col(order[static_cast<std::size_t>(k)]);
  }
  sol.U = std::move(U);
  sol.V = std::move(V);
}

}  // namespace

double umf_objective(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const Eigen::MatrixXd& U,
                     const Eigen::MatrixXd& V) {
  check_shapes(H, W, U, V);
  return objective(H, W, U, V);
}

double umf_objective(const ObservationGrid& grid, const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
  return umf_objective(grid.H, grid.W, U, V);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> umf_gradients(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W,
                                                          const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
  check_shapes(H, W, U, V);
  const Eigen::MatrixXd R = weighted_residual(H, W, U, V);
  return {2.0 * R * V, 2.0 * R.transpose() * U};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> umf_gradients(const ObservationGrid& grid, const Eigen::MatrixXd& U,
                                                          const Eigen::MatrixXd& V) {
  return umf_gradients(grid.H, grid.W, U, V);
}

UmfSolution solve_umf(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const UmfConfig& cfg) {
  cfg.validate();
  require(H.rows() == W.rows() && H.cols() == W.cols(), ErrorKind::Dimension, "umf: H and W differ in shape");
  require((W.array() > 0.5).any(), ErrorKind::Degenerate, "umf: no observed entries");
  const Eigen::MatrixXd Ht = H.transpose();
  const Eigen::MatrixXd Wt = W.transpose();

  UmfSolution best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    UmfSolution s = run_once(H, W, Ht, Wt, cfg, r);
    if (!have || s.objective < best.objective) {
      best = std::move(s);
      have = true;
    }
  }
  normalize_and_sort(best);
  best.objective = objective(H, W, best.U, best.V);
  return best;
}

UmfSolution solve_umf(const ObservationGrid& grid, const UmfConfig& cfg) { return solve_umf(grid.H, grid.W, cfg); }

void write_objective_trace(const UmfSolution& solution, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "iteration,objective\n" << std::setprecision(17);
  for (std::size_t t = 0; t < solution.trace.size(); ++t) out << t << ',' << solution.trace[t] << '\n';
}

}  // namespace umfloc
