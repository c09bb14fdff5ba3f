#include "iig/info.hpp"

#include <limits>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace iig {

namespace {

bool is_free(double p) { return p <= 0.5; }  // unknown (0.5) treated as free

BeliefOverlayPtr child_overlay(const BeliefOverlayPtr& parent) {
  return std::make_shared<BeliefOverlay>(parent);
}

RayHit belief_ray_cast(const GridWorld& geometry, const BeliefState& belief,
                       const BeliefOverlay& overlay, const Point2& origin, double angle,
                       double r_max) {
  return ray_cast_custom(geometry, origin, angle, r_max, [&](int cell) {
    return !is_free(overlay.occupancy(cell, belief));
  });
}

void check_pose_free(const SensedPose& pose, const GridWorld& geometry,
                     const BeliefState& belief, const BeliefOverlay& overlay) {
  if (!geometry.contains(pose.position) ||
      !is_free(overlay.occupancy(geometry.cell_of(pose.position), belief)))
    throw std::runtime_error("information: pose not in believed free space");
}

double signed_entropy(double p) { return p * std::log(p) + (1.0 - p) * std::log(1.0 - p); }

}  // namespace

InfoFunctionKind info_kind_from_string(const std::string& name) {
  if (name == "mi") return InfoFunctionKind::MI;
  if (name == "miub") return InfoFunctionKind::MIUB;
  if (name == "gpvr") return InfoFunctionKind::GPVR;
  if (name == "ugpvr") return InfoFunctionKind::UGPVR;
  throw std::invalid_argument("unknown information function: " + name);
}

std::string to_string(InfoFunctionKind kind) {
  switch (kind) {
    case InfoFunctionKind::MI: return "mi";
    case InfoFunctionKind::MIUB: return "miub";
    case InfoFunctionKind::GPVR: return "gpvr";
    case InfoFunctionKind::UGPVR: return "ugpvr";
  }
  return "?";
}

InfoResult information_mi(const SensedPose& pose, const GridWorld& geometry,
                          const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                          std::optional<double> i_near, const SensorModel& sensor,
                          const InverseModelParams& inv) {
  sensor.validate();
  inv.validate();
  auto overlay = std::make_shared<BeliefOverlay>(parent_overlay);
  check_pose_free(pose, geometry, belief, *overlay);

  double info = i_near.value_or(0.0);
  const double h_sat = cell_entropy(inv.p_sat);
  const double dz = 1.0 / sensor.integration_resolution;

  for (double angle : sensor.beam_angles(pose.heading)) {
    RayHit ray =
        belief_ray_cast(geometry, belief, *overlay, pose.position, angle, sensor.r_max);
    // The perception set includes the hit cell, when any.
    if (ray.hit_cell >= 0) {
      ray.cells.push_back(ray.hit_cell);
      ray.ranges.push_back(ray.range);
    }
    const int n_cells = static_cast<int>(ray.cells.size());
    if (n_cells == 0) continue;

    // Beam-cell probabilities at beam start; the marginal measurement
    // probability p_z uses these regardless of the per-cell updates below.
    std::vector<double> m(n_cells);
    for (int j = 0; j < n_cells; ++j) m[j] = overlay->occupancy(ray.cells[j], belief);

    // Marginal measurement probability per integration step. p(z | M = 0)
    // is read as "all beam cells free": the max-range-dominated density.
    // A beam blocked closer than one integration step still needs one
    // evaluation; otherwise the cell keeps its full entropy with no map
    // prediction and gets re-counted by every later beam.
    std::vector<double> z_steps;
    for (double z = dz; z <= ray.range + 1e-12; z += dz) z_steps.push_back(z);
    if (z_steps.empty()) z_steps.push_back(ray.range);

    std::vector<double> p_z;
    for (double z : z_steps) {
      double p1 = beam_likelihood(std::min(z, sensor.r_max), sensor.r_max, sensor);
      double p2 = 0.0;
      double prefix = 1.0;
      for (int j = 0; j < n_cells; ++j) {
        p2 += beam_likelihood(std::min(z, sensor.r_max), ray.ranges[j], sensor) * m[j] * prefix;
        prefix *= 1.0 - m[j];
      }
      p_z.push_back(p1 * prefix + p2);
    }

    double beam_delta = 0.0;
    for (int i = 0; i < n_cells; ++i) {
      const int cell = ray.cells[i];
      double m_bar = overlay->occupancy(cell, belief);
      const double h_i = cell_entropy(m_bar);
      if (h_i <= h_sat) continue;
      beam_delta += h_i;

      // Conditional map entropy: the inverse-model prediction sharpens the
      // cell once per integration step, as the estimator is specified.
      double h_bar = 0.0;
      for (std::size_t step = 0; step < p_z.size(); ++step) {
        m_bar = inverse_update(
            m_bar, is_free(m_bar) ? CellObservation::Free : CellObservation::Occupied, inv);
        h_bar += p_z[step] * signed_entropy(m_bar);
      }
      beam_delta += h_bar * dz;
      overlay->set(cell, {m_bar, overlay->variance(cell, belief)});
    }
    // Discretized integration may dip below zero; exact MI cannot.
    info += std::max(0.0, beam_delta);
  }
  return {info, overlay};
}

InfoResult information_miub(const SensedPose& pose, const GridWorld& geometry,
                            const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                            std::optional<double> i_near, const SensorModel& sensor,
                            const InverseModelParams& inv) {
  sensor.validate();
  inv.validate();
  auto overlay = std::make_shared<BeliefOverlay>(parent_overlay);
  check_pose_free(pose, geometry, belief, *overlay);

  double info = i_near.value_or(0.0);
  const double h_sat = cell_entropy(inv.p_sat);

  for (double angle : sensor.beam_angles(pose.heading)) {
    RayHit ray =
        belief_ray_cast(geometry, belief, *overlay, pose.position, angle, sensor.r_max);
    if (ray.hit_cell >= 0) ray.cells.push_back(ray.hit_cell);
    for (int cell : ray.cells) {
      const double m_bar = overlay->occupancy(cell, belief);
      if (cell_entropy(m_bar) <= h_sat) continue;
      info += cell_entropy(m_bar);
      const double updated = inverse_update(
          m_bar, is_free(m_bar) ? CellObservation::Free : CellObservation::Occupied, inv);
      overlay->set(cell, {updated, overlay->variance(cell, belief)});
    }
  }
  return {info, overlay};
}

VarianceReduction gpvr_variance_reduction(
    const Eigen::MatrixXd& train_inputs, const Eigen::MatrixXd& submap_points,
    const std::vector<double>& submap_variances, const KernelSpec& kernel,
    double noise_variance, const Eigen::Matrix2d& pose_cov, const GaussHermiteScheme& scheme) {
  const int n = static_cast<int>(train_inputs.cols());
  const int m = static_cast<int>(submap_points.cols());
  VarianceReduction out;
  if (n == 0 || m == 0) return out;

  const bool uncertain = !pose_cov.isZero(0.0);
  auto eval = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (!uncertain) return kernel_eval(kernel, a, b);
    return expected_kernel(kernel, {a[0], a[1]}, pose_cov, {b[0], b[1]}, scheme);
  };

  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) c(i, j) = c(j, i) = eval(train_inputs.col(i), train_inputs.col(j));
  Eigen::MatrixXd c_star(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) c_star(i, j) = eval(train_inputs.col(i), submap_points.col(j));

  Eigen::MatrixXd gram = c;
  gram.diagonal().array() += noise_variance > 0.0 ? noise_variance : 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gpvr: Cholesky factorization failed");
  const Eigen::MatrixXd v_cols = llt.matrixL().solve(c_star);

  out.fused.resize(m);
  for (int j = 0; j < m; ++j) {
    // Submap points are fixed map locations; only the training inputs depend
    // on the uncertain pose, so the prior variance uses the plain kernel.
    const double prior = kernel_eval(kernel, submap_points.col(j), submap_points.col(j));
    const double v = std::max(prior - v_cols.col(j).squaredNorm(), 1e-12);
    const double sigma = submap_variances[j];
    const double fused = bcm_fuse(sigma, v);
    out.fused[j] = fused;
    out.increment += std::log(sigma) - std::log(fused);
  }
  return out;
}

namespace {

// Predicted-measurement training set for occupancy GPVR: hit points labeled
// +1, free samples along each beam (one per meter) labeled -1.
struct PredictedTraining {
  Eigen::MatrixXd inputs;  // 2 x n
  std::vector<int> submap_cells;
  Eigen::MatrixXd submap_points;
};

PredictedTraining build_gpvr_training(const SensedPose& pose, const GridWorld& geometry,
                                      const BeliefState& belief, const BeliefOverlay& overlay,
                                      const SensorModel& sensor) {
  std::vector<Point2> train;
  std::vector<int> cells;
  std::unordered_map<int, int> seen;
  auto add_submap_cell = [&](int cell) {
    if (seen.emplace(cell, 1).second) cells.push_back(cell);
  };
  for (double angle : sensor.beam_angles(pose.heading)) {
    const RayHit ray =
        belief_ray_cast(geometry, belief, overlay, pose.position, angle, sensor.r_max);
    const double cx = std::cos(angle);
    const double cy = std::sin(angle);
    for (double d = 1.0; d < ray.range; d += 1.0)
      train.push_back({pose.position.x + d * cx, pose.position.y + d * cy});
    if (ray.hit_cell >= 0)
      train.push_back({pose.position.x + ray.range * cx, pose.position.y + ray.range * cy});
    for (int cell : ray.cells) add_submap_cell(cell);
    if (ray.hit_cell >= 0) add_submap_cell(ray.hit_cell);
  }
  PredictedTraining out;
  out.inputs.resize(2, static_cast<int>(train.size()));
  for (int i = 0; i < static_cast<int>(train.size()); ++i)
    out.inputs.col(i) << train[i].x, train[i].y;
  out.submap_cells = std::move(cells);
  out.submap_points.resize(2, static_cast<int>(out.submap_cells.size()));
  for (int i = 0; i < static_cast<int>(out.submap_cells.size()); ++i) {
    const Point2 center = geometry.cell_center(out.submap_cells[i]);
    out.submap_points.col(i) << center.x, center.y;
  }
  return out;
}

InfoResult gpvr_impl(const SensedPose& pose, const GridWorld& geometry,
                     const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                     std::optional<double> i_near, const KernelSpec& kernel,
                     const SensorModel& sensor, double noise_variance,
                     const Eigen::Matrix2d& pose_cov, const GaussHermiteScheme& scheme) {
  sensor.validate();
  kernel.validate();
  auto overlay = std::make_shared<BeliefOverlay>(parent_overlay);
  check_pose_free(pose, geometry, belief, *overlay);

  const PredictedTraining training =
      build_gpvr_training(pose, geometry, belief, *overlay, sensor);
  double info = i_near.value_or(0.0);
  if (training.inputs.cols() == 0 || training.submap_cells.empty())
    return {info, overlay};

  std::vector<double> variances(training.submap_cells.size());
  for (std::size_t i = 0; i < training.submap_cells.size(); ++i)
    variances[i] = overlay->variance(training.submap_cells[i], belief);

  const VarianceReduction result = gpvr_variance_reduction(
      training.inputs, training.submap_points, variances, kernel, noise_variance, pose_cov,
      scheme);
  info += result.increment;
  for (std::size_t i = 0; i < training.submap_cells.size(); ++i) {
    const int cell = training.submap_cells[i];
    overlay->set(cell, {overlay->occupancy(cell, belief), result.fused[i]});
  }
  return {info, overlay};
}

}  // namespace

InfoResult information_gpvr(const SensedPose& pose, const GridWorld& geometry,
                            const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                            std::optional<double> i_near, const KernelSpec& kernel,
                            const SensorModel& sensor, double noise_variance) {
  static const GaussHermiteScheme unused = GaussHermiteScheme::make(1);
  return gpvr_impl(pose, geometry, belief, parent_overlay, i_near, kernel, sensor,
                   noise_variance, Eigen::Matrix2d::Zero(), unused);
}

InfoResult information_ugpvr(const PoseBelief& pose_belief, double heading,
                             const GridWorld& geometry, const BeliefState& belief,
                             const BeliefOverlayPtr& parent_overlay,
                             std::optional<double> i_near, const KernelSpec& kernel,
                             const GaussHermiteScheme& scheme, const SensorModel& sensor,
                             double noise_variance) {
  pose_belief.validate();
  const SensedPose pose{pose_belief.position(), heading};
  return gpvr_impl(pose, geometry, belief, parent_overlay, i_near, kernel, sensor,
                   noise_variance, pose_belief.position_covariance(), scheme);
}

InfoResult evaluate_information(const InfoFunctionConfig& config, const SensedPose& pose,
                                const PoseBelief& pose_belief, const GridWorld& geometry,
                                const BeliefState& belief, const BeliefOverlayPtr& parent_overlay,
                                std::optional<double> i_near) {
  switch (config.kind) {
    case InfoFunctionKind::MI:
      return information_mi(pose, geometry, belief, parent_overlay, i_near, config.sensor,
                            config.inverse);
    case InfoFunctionKind::MIUB:
      return information_miub(pose, geometry, belief, parent_overlay, i_near, config.sensor,
                              config.inverse);
    case InfoFunctionKind::GPVR:
      return information_gpvr(pose, geometry, belief, parent_overlay, i_near, config.kernel,
                              config.sensor, config.gp_noise_variance);
    case InfoFunctionKind::UGPVR:
      return information_ugpvr(pose_belief, pose.heading, geometry, belief, parent_overlay,
                               i_near, config.kernel, config.scheme, config.sensor,
                               config.gp_noise_variance);
  }
  throw std::logic_error("evaluate_information: unknown kind");
}

double max_information_gain_hint(const InfoFunctionConfig& config, double map_resolution) {
  if (config.kind == InfoFunctionKind::GPVR || config.kind == InfoFunctionKind::UGPVR)
    return std::numeric_limits<double>::infinity();
  const double cells_per_beam = config.sensor.r_max / map_resolution + 2.0;
  return config.sensor.beam_count * cells_per_beam * std::log(2.0);
}

}  // namespace iig
