#include "iig/pose.hpp"

#include <cmath>
#include <stdexcept>

namespace iig {

MotionNoise MotionNoise::from_stddevs(double sx, double sy, double stheta) {
  MotionNoise noise;
  noise.q.diagonal() << sx * sx, sy * sy, stheta * stheta;
  return noise;
}

void MotionNoise::validate() const {
  if ((q.diagonal().array() < 0.0).any())
    throw std::invalid_argument("MotionNoise: diagonal entries must be >= 0");
}

void PoseBelief::validate() const {
  if (!covariance.isApprox(covariance.transpose(), 1e-12))
    throw std::invalid_argument("PoseBelief: covariance not symmetric");
  Eigen::Matrix3d jittered = covariance + 1e-15 * Eigen::Matrix3d::Identity();
  Eigen::LLT<Eigen::Matrix3d> llt(jittered);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("PoseBelief: covariance not positive semi-definite");
}

PoseBelief propagate(const PoseBelief& belief, const Point2& from, const Point2& to,
                     const MotionNoise& noise) {
  belief.validate();
  noise.validate();
  const double step = distance(from, to);

  PoseBelief next;
  if (step == 0.0) {
    next.mean = Eigen::Vector3d(to.x, to.y, belief.mean[2]);
    next.covariance = belief.covariance + noise.q;
  } else {
    const double heading = std::atan2(to.y - from.y, to.x - from.x);
    next.mean = Eigen::Vector3d(to.x, to.y, heading);
    // Unicycle Jacobian at the post-turn heading; |F| = 1.
    Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
    f(0, 2) = -step * std::sin(heading);
    f(1, 2) = step * std::cos(heading);
    next.covariance = f * belief.covariance * f.transpose() + noise.q;
  }
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose());
  return next;
}

}  // namespace iig
