#pragma once

#include <Eigen/Dense>

#include "iig/geometry.hpp"

namespace iig {

struct MotionNoise {
  /// Diagonal process-noise covariance for (x, y, heading).
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();

  static MotionNoise from_stddevs(double sx, double sy, double stheta);
  void validate() const;
};

struct PoseBelief {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();  // x, y, heading
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();

  Point2 position() const { return {mean[0], mean[1]}; }
  Eigen::Matrix2d position_covariance() const { return covariance.topLeftCorner<2, 2>(); }
  void validate() const;
};

/// First-order covariance propagation of a straight unicycle step along an
/// edge. The mean moves to the edge endpoint with heading along the edge;
/// Sigma <- F Sigma F^T + Q with F the unicycle Jacobian and W = I.
PoseBelief propagate(const PoseBelief& belief, const Point2& from, const Point2& to,
                     const MotionNoise& noise);

}  // namespace iig
