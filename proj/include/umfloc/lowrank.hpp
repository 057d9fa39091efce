#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "umfloc/field.hpp"
#include "umfloc/grid.hpp"

namespace umfloc {

struct CompletionConfig {
  double epsilon = 0.0;
  int max_rank = 3;
  int max_iterations = 500;  // per regularization level
  double tolerance = 1e-8;   // relative Frobenius change between iterates
  double residual_slack = 0.01;

  void validate() const;
};

struct SvdResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;
};

struct ResidualTracePoint {
  int iteration;
  double lambda;
  double residual;
};

struct CompletedMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd values;
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;
  double residual = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<ResidualTracePoint> trace;

  double nuclear_norm() const { return values.sum(); }
};

/// Flips each (u_k, v_k) pair so that u_k's largest-magnitude entry is
/// positive, then zeroes entries below 1e-10 in magnitude.
void fix_signs(Eigen::MatrixXd& U, Eigen::MatrixXd& V);

/// Leading r singular triples, sign-fixed.
SvdResult truncated_svd(const Eigen::MatrixXd& X, int rank);

/// Minimizes ||X||_* subject to ||W o (X - H)||_F <= epsilon.
CompletedMatrix complete(const Eigen::MatrixXd& H, const Eigen::MatrixXd& W, const CompletionConfig& cfg);
CompletedMatrix complete(const ObservationGrid& grid, const CompletionConfig& cfg);

/// sqrt(M) * eps_bar with
/// eps_bar^2 = (a L / N)^2 (K^2 L^2 / (2 N^2) + sqrt(2) K L s / (a N) + s^2 / a^2).
double choose_epsilon(double sigma_bar, std::size_t count, int size, double width, double alpha,
                      double lipschitz = 0.0);

/// Largest finite-difference slope of h on a lattice of step `step` over [0, L].
double estimate_lipschitz(const FieldModel& model, double step);

void write_residual_trace(const CompletedMatrix& completed, const std::string& path);

}  // namespace umfloc
