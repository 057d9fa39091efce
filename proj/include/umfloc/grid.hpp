#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "umfloc/field.hpp"
#include "umfloc/geometry.hpp"

namespace umfloc {

/// N x N observation matrix on an L x L grid rotated by theta about the area
/// centre. Row i holds cells with local y = cY(i); column j those with local
/// x = cX(j). Unobserved cells have W = 0 and H = 0.
struct ObservationGrid {
  int size = 0;
  double width = 1.0;
  double theta = 0.0;
  Eigen::MatrixXd H;
  Eigen::MatrixXd W;
  Eigen::VectorXd cX;
  Eigen::VectorXd cY;
  std::size_t dropped = 0;

  double spacing() const { return width / size; }
  std::size_t observed() const;
  bool fully_observed() const { return observed() == static_cast<std::size_t>(size) * size; }
  /// Local (rotated-frame) coordinates to world coordinates.
  Vec2 to_world(const Vec2& local) const { return rotate(local, theta); }
  Vec2 to_local(const Vec2& world) const { return rotate(world, -theta); }
};

/// Centres of N equal cells spanning [-L/2, L/2].
Eigen::VectorXd cell_centers(int size, double width);

/// Bins the measurements into an N x N grid rotated by theta. Each observed
/// cell holds (L/N) times the mean of its readings; samples outside the
/// rotated square are dropped and counted.
ObservationGrid build_grid(const MeasurementSet& ms, int size, double width, double theta = 0.0);

/// Fully observed grid around an existing matrix.
ObservationGrid full_grid(const Eigen::MatrixXd& H, double width, double theta = 0.0);

enum class GridPolicy {
  Conservative,  // N = floor(sqrt(M))
  Aggressive,    // largest N with 1.5 N (log N)^2 <= M
  HalfFill,      // largest N with N^2 / 2 <= M
};
enum class LogBase { Natural, Ten };

const char* to_string(GridPolicy policy) noexcept;

int choose_grid_size(std::size_t count, GridPolicy policy, LogBase base = LogBase::Natural);

struct SignatureMatrixExact {
  std::vector<Eigen::MatrixXd> per_source;
  Eigen::MatrixXd aggregate;
};

/// Noise-free, fully sampled per-source energy matrices at the cell centres.
SignatureMatrixExact exact_signature_matrix(const SourceConfig& sources, const FieldModel& model, int size,
                                            double width, double theta = 0.0);

/// Writes H as CSV (-1 marks unobserved cells) plus `<path>.meta.json` with N, L, theta and seed.
void write_grid(const ObservationGrid& grid, const std::string& path, std::uint64_t seed = 0);
ObservationGrid read_grid(const std::string& path, std::uint64_t* seed = nullptr);

}  // namespace umfloc
