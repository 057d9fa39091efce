#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "umfloc/field.hpp"
#include "umfloc/peaks.hpp"

namespace umfloc {

/// Location of the largest reading; ties go to the lowest index.
LocationEstimate naive_localize(const MeasurementSet& ms);

struct WclOptions {
  double tolerance = 1e-6;  // in units of L
  int max_iterations = 100;
};

/// Squared-energy weighted centroid over a moving window of radius
/// max(L/8, distance to the window_size-th nearest sensor), started at the
/// naive estimate.
LocationEstimate wcl_localize(const MeasurementSet& ms, std::size_t window_size, double width,
                              const WclOptions& options = {});

enum class KernelKind { Gaussian, Laplacian };

const char* to_string(KernelKind kind) noexcept;

double kernel_value(KernelKind kind, double lambda, const Vec2& z, const Vec2& center);

struct KernelFit {
  KernelKind kind = KernelKind::Gaussian;
  double lambda = 1.0;
  Points centers;
  std::vector<double> weights;
  double training_loss = 0.0;    // mean squared residual on the training split
  double validation_loss = 0.0;  // mean squared residual on the validation split
  std::vector<double> loss_trace;  // training loss after each accepted step of the chosen restart
};

struct KernelOptions {
  int restarts = 5;
  int max_iterations = 100;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

/// Fits sum_k a_k B(z, c_k; lambda) to the training split for one kernel,
/// best of `restarts` starts; losses are mean squared residuals.
KernelFit fit_kernel(const MeasurementSet& ms, std::size_t sources, KernelKind kind, const KernelOptions& options = {});

/// Fits both kernels and keeps the one with the lower validation loss.
std::pair<Points, KernelFit> kernel_localize(const MeasurementSet& ms, std::size_t sources,
                                             const KernelOptions& options = {});

}  // namespace umfloc
