#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "umfloc/grid.hpp"

namespace umfloc {

struct UmfConfig {
  int factors = 1;
  int restarts = 5;
  int max_iterations = 200;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  /// Initial step of each line search; 0 selects 1/||V||_F^2 (resp. 1/||U||_F^2).
  double initial_step = 0.0;
  double tolerance = 1e-8;
  int patience = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct UmfSolution {
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;
  double objective = 0.0;
  std::vector<double> trace;  // objective after each iteration, trace[0] at the initial point
  int restart = 0;
  int iterations = 0;

  /// First iteration whose objective is <= threshold, or -1.
  int iterations_to(double threshold) const;
};

/// ||W o (H - U V^T)||_F^2
double umf_objective(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const Eigen::MatrixXd& U,
                     const Eigen::MatrixXd& V);
double umf_objective(const ObservationGrid& grid, const Eigen::MatrixXd& U, const Eigen::MatrixXd& V);

/// (df/dU, df/dV)
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> umf_gradients(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W,
                                                          const Eigen::MatrixXd& U, const Eigen::MatrixXd& V);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> umf_gradients(const ObservationGrid& grid, const Eigen::MatrixXd& U,
                                                          const Eigen::MatrixXd& V);

/// Alternating projected gradient on U then V with backtracking, best of
/// `restarts` random starts. Columns of U come back unit-norm and the columns
/// are ordered by the peak row of V.
UmfSolution solve_umf(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const UmfConfig& cfg);
UmfSolution solve_umf(const ObservationGrid& grid, const UmfConfig& cfg);

void write_objective_trace(const UmfSolution& solution, const std::string& path);

}  // namespace umfloc
