#pragma once

#include <Eigen/Dense>

namespace umfloc {

enum class Direction { NonDecreasing, NonIncreasing };

/// Euclidean projection onto {0 <= y_1 <= ... <= y_N} (or the reversed cone):
/// pool-adjacent-violators followed by clamping negative pools to zero.
Eigen::VectorXd project_isotonic_nonneg(const Eigen::Ref<const Eigen::VectorXd>& x, Direction direction);

/// Non-negative vector that rises to `peak` (0-based, first maximal entry) and falls after it.
struct UnimodalVector {
  Eigen::VectorXd values;
  Eigen::Index peak = 0;
  Eigen::Index split = 1;  // 1-based odd split that produced `values`
};

/// Exact projection onto the non-negative unimodal cone.
///
/// For every odd split s (1-based) the prefix x_1..x_s is projected onto the
/// ascending cone and the suffix onto the descending cone; any such
/// concatenation is unimodal with its peak at s or s+1, so scanning odd s
/// covers every peak position. Branch costs are accumulated incrementally as
/// the pools are built, making the scan linear in N. Ties go to the smallest s.
UnimodalVector project_unimodal(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Column-by-column unimodal projection.
Eigen::MatrixXd project_unimodal_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Zero-tolerance membership test for the non-negative unimodal cone.
bool is_unimodal(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace umfloc
