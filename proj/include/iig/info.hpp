#pragma once

#include <optional>

#include "iig/belief.hpp"
#include "iig/gp.hpp"
#include "iig/pose.hpp"

namespace iig {

struct SensedPose {
  Point2 position;
  double heading = 0.0;
};

struct InfoResult {
  double info = 0.0;
  BeliefOverlayPtr overlay;
};

enum class InfoFunctionKind { MI, MIUB, GPVR, UGPVR };

InfoFunctionKind info_kind_from_string(const std::string& name);
std::string to_string(InfoFunctionKind kind);

/// Mutual information with measurement integration over the beam model
/// (the full estimator; per-beam contributions clamped at zero from below).
InfoResult information_mi(const SensedPose& pose, const GridWorld& geometry,
                          const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                          std::optional<double> i_near, const SensorModel& sensor,
                          const InverseModelParams& inv);

/// Mutual-information upper bound: total unsaturated map entropy in the
/// perception field, with inverse-model prediction but no z-integration.
InfoResult information_miub(const SensedPose& pose, const GridWorld& geometry,
                            const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                            std::optional<double> i_near, const SensorModel& sensor,
                            const InverseModelParams& inv);

/// GP variance reduction with BCM fusion over the perceived sub-map.
InfoResult information_gpvr(const SensedPose& pose, const GridWorld& geometry,
                            const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                            std::optional<double> i_near, const KernelSpec& kernel,
                            const SensorModel& sensor, double noise_variance);

/// GPVR with every kernel evaluation replaced by its expectation under the
/// node's positional covariance.
InfoResult information_ugpvr(const PoseBelief& pose_belief, double heading,
                             const GridWorld& geometry, const BeliefState& belief,
                             const BeliefOverlayPtr& parent_overlay,
                             std::optional<double> i_near, const KernelSpec& kernel,
                             const GaussHermiteScheme& scheme, const SensorModel& sensor,
                             double noise_variance);

/// Shared GPVR/UGPVR core: predictive GP variances for the sub-map points,
/// BCM-fused against current variances. With a nonzero pose covariance every
/// kernel evaluation is the Gauss-Hermite expected kernel.
struct VarianceReduction {
  double increment = 0.0;            // sum of log(sigma) - log(fused)
  std::vector<double> fused;         // one entry per sub-map point
};
VarianceReduction gpvr_variance_reduction(
    const Eigen::MatrixXd& train_inputs, const Eigen::MatrixXd& submap_points,
    const std::vector<double>& submap_variances, const KernelSpec& kernel,
    double noise_variance, const Eigen::Matrix2d& pose_cov, const GaussHermiteScheme& scheme);

/// Parameter block for planner-driven dispatch over the four estimators.
struct InfoFunctionConfig {
  InfoFunctionKind kind = InfoFunctionKind::MIUB;
  SensorModel sensor;
  InverseModelParams inverse;
  KernelSpec kernel;
  GaussHermiteScheme scheme = GaussHermiteScheme::make(11);
  double gp_noise_variance = 0.1;
};

InfoResult evaluate_information(const InfoFunctionConfig& config, const SensedPose& pose,
                                const PoseBelief& pose_belief, const GridWorld& geometry,
                                const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                                std::optional<double> i_near);

/// Upper bound on the information one call can add over I_near, suitable for
/// PlannerConfig::max_gain_hint. For the entropy-based estimators every cell
/// along a beam contributes at most ln 2 nats; the variance-reduction
/// estimators have no cheap bound, so +infinity is returned.
double max_information_gain_hint(const InfoFunctionConfig& config, double map_resolution);

}  // namespace iig
