#include "iig/mission.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "iig/gp.hpp"

namespace iig {

std::vector<double> simulate_scan(const GridWorld& truth, const SensedPose& pose,
                                  const SensorModel& sensor, SeededRng& rng) {
  if (!truth.free_at(pose.position))
    throw std::invalid_argument("simulate_scan: pose is inside an obstacle");
  sensor.validate();
  std::vector<double> out;
  out.reserve(sensor.beam_count);
  for (double angle : sensor.beam_angles(pose.heading)) {
    const RayHit ray = ray_cast(truth, pose.position, angle, sensor.r_max);
    const double z_hat = ray.range;
    const double u = rng.uniform();
    double z;
    if (u < sensor.z_hit) {
      do {
        z = z_hat + sensor.sigma_hit * rng.normal();
      } while (z < 0.0 || z > sensor.r_max);
    } else if (u < sensor.z_hit + sensor.z_short) {
      if (z_hat <= 0.0) {
        z = 0.0;
      } else {
        const double mass = 1.0 - std::exp(-sensor.lambda_short * z_hat);
        z = -std::log(1.0 - rng.uniform() * mass) / sensor.lambda_short;
      }
    } else if (u < sensor.z_hit + sensor.z_short + sensor.z_max) {
      z = sensor.r_max;
    } else {
      z = rng.uniform(0.0, sensor.r_max);
    }
    out.push_back(std::clamp(z, 0.0, sensor.r_max));
  }
  return out;
}

void apply_scan(BeliefState& belief, const GridWorld& geometry, const SensedPose& pose,
                const SensorModel& sensor, const InverseModelParams& params,
                const std::vector<double>& ranges) {
  const std::vector<double> angles = sensor.beam_angles(pose.heading);
  if (ranges.size() != angles.size())
    throw std::invalid_argument("apply_scan: one range per beam required");
  constexpr double kMaxReadingSlack = 1e-9;
  // Range noise is a sizeable fraction of a cell, so a reading that
  // undershoots the surface would mark the free cell in front of it as
  // occupied and leave the surface cell untouched. Push the occupied
  // endpoint half a cell into the surface and stop the free sweep half a
  // cell short of the reading to keep both updates on the right side.
  const double push = 0.5 * geometry.resolution();
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double z = std::clamp(ranges[k], 0.0, sensor.r_max);
    const bool is_return = z < sensor.r_max - kMaxReadingSlack;
    // A max-range reading is indistinguishable from a dropout under the
    // mixture model, so it carries no map update; sweeping it as free would
    // steadily erode surfaces that other beams have already established.
    if (!is_return) continue;
    // Traverse geometry only; no occupancy test stops the walk.
    const double free_span = z - push;
    RayHit ray;
    if (free_span > 0.0)
      ray = ray_cast_custom(geometry, pose.position, angles[k], free_span, [](int) { return false; });
    int hit_cell = -1;
    {
      const double z_hit = std::min(z + push, sensor.r_max);
      const Point2 endpoint{pose.position.x + z_hit * std::cos(angles[k]),
                            pose.position.y + z_hit * std::sin(angles[k])};
      if (geometry.contains(endpoint)) hit_cell = geometry.cell_of(endpoint);
    }
    for (int cell : ray.cells) {
      if (cell == hit_cell) continue;
      belief.set_occupancy(cell,
                           inverse_update(belief.occupancy(cell), CellObservation::Free, params));
    }
    if (hit_cell >= 0)
      belief.set_occupancy(
          hit_cell, inverse_update(belief.occupancy(hit_cell), CellObservation::Occupied, params));
  }
}

double occupancy_auc(const BeliefState& belief, const GridWorld& truth, int thresholds) {
  if (belief.cell_count() != truth.cell_count())
    throw std::invalid_argument("occupancy_auc: belief and truth sizes differ");
  long positives = 0, negatives = 0;
  for (int i = 0; i < truth.cell_count(); ++i) (truth.occupied(i) ? positives : negatives)++;
  if (positives == 0 || negatives == 0)
    throw std::invalid_argument("occupancy_auc: ground truth has a single class");
  std::vector<std::pair<double, double>> roc;  // (fpr, tpr), threshold descending
  for (int k = 0; k <= thresholds; ++k) {
    const double t = 1.0 - static_cast<double>(k) / thresholds;
    long tp = 0, fp = 0;
    for (int i = 0; i < truth.cell_count(); ++i) {
      if (belief.occupancy(i) >= t) (truth.occupied(i) ? tp : fp)++;
    }
    roc.emplace_back(static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives);
  }
  double auc = 0.0;
  for (std::size_t k = 1; k < roc.size(); ++k)
    auc += 0.5 * (roc[k].first - roc[k - 1].first) * (roc[k].second + roc[k - 1].second);
  return auc;
}

double haversine_distance(double lat_a_deg, double lon_a_deg, double lat_b_deg,
                          double lon_b_deg) {
  constexpr double kEarthRadius = 6371000.0;
  const double to_rad = std::numbers::pi / 180.0;
  const double phi_a = lat_a_deg * to_rad;
  const double phi_b = lat_b_deg * to_rad;
  const double dphi = (lat_b_deg - lat_a_deg) * to_rad;
  const double dlambda = (lon_b_deg - lon_a_deg) * to_rad;
  const double s = std::sin(dphi / 2.0);
  const double t = std::sin(dlambda / 2.0);
  const double a = s * s + std::cos(phi_a) * std::cos(phi_b) * t * t;
  return 2.0 * kEarthRadius * std::asin(std::min(1.0, std::sqrt(a)));
}

MissionLog run_exploration(const ExplorationConfig& config) {
  const GridWorld& truth = config.world;
  BeliefState belief = config.initial_belief
                           ? *config.initial_belief
                           : BeliefState(truth.width(), truth.height(), 0.5, 1.0);
  if (belief.cell_count() != truth.cell_count())
    throw std::invalid_argument("run_exploration: initial belief size mismatch");

  MissionLog log;
  SeededRng scan_rng(config.planner.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  Point2 pose = config.planner.start;
  double heading = config.planner.start_heading;
  const double h_term = cell_entropy(config.p_sat_term);
  int consecutive_root_only = 0;

  for (int step = 0; step < config.max_steps; ++step) {
    apply_scan(belief, truth, {pose, heading}, config.info.sensor, config.map_update,
               simulate_scan(truth, {pose, heading}, config.info.sensor, scan_rng));

    StepRecord record;
    record.step = step;
    record.pose = pose;
    record.heading = heading;
    record.average_entropy = average_map_entropy(belief);
    record.distance_traveled = log.total_distance;
    if (record.average_entropy <= h_term) {
      log.steps.push_back(record);
      log.terminated = true;
      break;
    }

    // Plan on the believed map: cells above 0.5 are obstacles, unknown
    // cells count as traversable.
    GridWorld believed(truth.width(), truth.height(), truth.resolution(), truth.origin());
    for (int i = 0; i < believed.cell_count(); ++i) {
      auto [ix, iy] = believed.cell_coords(i);
      believed.set_occupied(ix, iy, belief.occupancy(i) > 0.5);
    }
    {
      auto [ix, iy] = believed.cell_coords(believed.cell_of(pose));
      believed.set_occupied(ix, iy, false);
    }

    PlannerConfig pc = config.planner;
    pc.start = pose;
    pc.start_heading = heading;
    pc.seed = config.planner.seed + 1 + static_cast<std::uint64_t>(step);
    pc.max_gain_hint = max_information_gain_hint(config.info, believed.resolution());
    // Plan against a scratch copy of the map so predicted updates from tree
    // nodes are shared across branches without touching the mission belief.
    BeliefState planning = belief;
    Tree tree =
        iig_tree(believed, make_information_fn(config.info, believed, planning), pc, &planning);
    record.tree_nodes = static_cast<int>(tree.nodes.size());
    record.trace_length = static_cast<int>(tree.trace.size());

    if (tree.nodes.size() == 1) {
      if (++consecutive_root_only >= 2) {
        log.abort_reason = "planner returned a root-only tree twice in a row";
        log.steps.push_back(record);
        break;
      }
      log.steps.push_back(record);
      continue;
    }
    consecutive_root_only = 0;

    const Path path = select_path(tree, config.selection);
    record.path_ids = path.node_ids;
    for (int id : path.node_ids) record.path_positions.push_back(tree.nodes[id].position);
    for (std::size_t i = 1; i < path.node_ids.size(); ++i) {
      const Point2 next = tree.nodes[path.node_ids[i]].position;
      // The path was planned on the believed map, where unknown cells count
      // as traversable; stop at the first segment the true world blocks.
      if (!truth.free_at(next) || !no_collision(pose, next, truth)) break;
      heading = std::atan2(next.y - pose.y, next.x - pose.x);
      log.total_distance += distance(pose, next);
      pose = next;
      apply_scan(belief, truth, {pose, heading}, config.info.sensor, config.map_update,
                 simulate_scan(truth, {pose, heading}, config.info.sensor, scan_rng));
    }
    record.distance_traveled = log.total_distance;
    log.total_info = tree.nodes[path.leaf()].info;
    log.last_tree = std::move(tree);
    log.last_path = path;
    log.steps.push_back(std::move(record));
  }

  log.final_entropy = average_map_entropy(belief);
  log.auc = occupancy_auc(belief, truth);
  return log;
}

WssDataset WssDataset::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  WssDataset data;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.find_first_not_of("0123456789+-., \t") != std::string::npos) {
      first = false;
      continue;  // header
    }
    first = false;
    std::istringstream row(line);
    std::string field;
    WssRecord rec;
    if (!std::getline(row, field, ',')) continue;
    rec.latitude = std::stod(field);
    if (!std::getline(row, field, ',')) continue;
    rec.longitude = std::stod(field);
    if (!std::getline(row, field, ',')) continue;
    rec.signal_dbm = std::stod(field);
    data.records.push_back(rec);
  }
  if (data.records.size() < 2)
    throw std::runtime_error("dataset too small for metric conversion: " + path);
  return data;
}

std::vector<Point2> WssDataset::metric_positions() const {
  double lat0 = records.front().latitude, lon0 = records.front().longitude;
  for (const WssRecord& r : records) {
    lat0 = std::min(lat0, r.latitude);
    lon0 = std::min(lon0, r.longitude);
  }
  std::vector<Point2> out;
  out.reserve(records.size());
  for (const WssRecord& r : records) {
    out.push_back({haversine_distance(lat0, lon0, lat0, r.longitude),
                   haversine_distance(lat0, lon0, r.latitude, lon0)});
  }
  return out;
}

namespace {

/// (x, y, log10(1 + distance to the strongest-signal anchor)); the third
/// feature follows the log-distance attenuation structure of the field.
Eigen::MatrixXd field_features(const std::vector<Point2>& positions, const Point2& anchor) {
  Eigen::MatrixXd f(3, positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    f(0, i) = positions[i].x;
    f(1, i) = positions[i].y;
    f(2, i) = std::log10(1.0 + distance(positions[i], anchor));
  }
  return f;
}

}  // namespace

MissionLog run_monitoring(const MonitoringConfig& config) {
  std::vector<Point2> positions;
  std::vector<double> signals;
  double extent_x = config.field_extent, extent_y = config.field_extent;

  if (!config.dataset_csv.empty()) {
    const WssDataset data = WssDataset::load_csv(config.dataset_csv);
    positions = data.metric_positions();
    extent_x = extent_y = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      signals.push_back(data.records[i].signal_dbm);
      extent_x = std::max(extent_x, positions[i].x);
      extent_y = std::max(extent_y, positions[i].y);
    }
  } else {
    SeededRng field_rng(config.field_seed);
    const Point2 tx{field_rng.uniform(0.2, 0.8) * extent_x, field_rng.uniform(0.2, 0.8) * extent_y};
    for (int i = 0; i < config.synthetic_points; ++i) {
      const Point2 p{field_rng.uniform(0.0, extent_x), field_rng.uniform(0.0, extent_y)};
      const double d = std::max(distance(p, tx), 1.0);
      positions.push_back(p);
      signals.push_back(config.tx_power_dbm - 10.0 * config.path_loss_exponent * std::log10(d) +
                        config.shadowing_sigma_dbm * field_rng.normal());
    }
  }
  if (positions.size() < 4) throw std::runtime_error("monitoring: dataset too small for fitting");

  // Uniform-stride downsample to the training cap.
  if (static_cast<int>(positions.size()) > config.max_train_points) {
    std::vector<Point2> p2;
    std::vector<double> s2;
    const double stride = static_cast<double>(positions.size()) / config.max_train_points;
    for (int i = 0; i < config.max_train_points; ++i) {
      const auto idx = static_cast<std::size_t>(i * stride);
      p2.push_back(positions[idx]);
      s2.push_back(signals[idx]);
    }
    positions.swap(p2);
    signals.swap(s2);
  }

  const std::size_t anchor_idx =
      std::max_element(signals.begin(), signals.end()) - signals.begin();
  const Point2 anchor = positions[anchor_idx];

  const double signal_mean =
      std::accumulate(signals.begin(), signals.end(), 0.0) / signals.size();
  TrainingSet train;
  train.inputs = field_features(positions, anchor);
  train.targets = Eigen::Map<const Eigen::VectorXd>(signals.data(), signals.size()).array() -
                  signal_mean;
  train.noise_variance = config.gp_noise_variance;

  double target_var = 0.0;
  for (int i = 0; i < train.targets.size(); ++i) target_var += train.targets[i] * train.targets[i];
  target_var = std::max(target_var / train.targets.size(), 1e-3);

  KernelSpec initial;
  initial.family = KernelFamily::SquaredExponentialArd;
  initial.lengthscales = Eigen::Vector3d(extent_x / 4.0, extent_y / 4.0, 0.5);
  initial.signal_variance = target_var;
  const KernelSpec surface_kernel = fit_hyperparameters(train, initial, {3, 150, config.field_seed});

  // Dense query surface; its GP posterior mean acts as ground truth.
  std::vector<Point2> queries;
  for (double y = config.query_resolution / 2.0; y < extent_y; y += config.query_resolution)
    for (double x = config.query_resolution / 2.0; x < extent_x; x += config.query_resolution)
      queries.push_back({x, y});
  const int n_query = static_cast<int>(queries.size());
  const GpPrediction surface =
      gp_predict(train, field_features(queries, anchor), surface_kernel);
  Eigen::VectorXd truth_field = surface.means.array() + signal_mean;

  SpatialIndex query_index;
  for (const Point2& q : queries) query_index.insert(q);

  // Obstacle-free planning workspace over the field extent.
  GridWorld world(std::max(1, static_cast<int>(std::ceil(extent_x))),
                  std::max(1, static_cast<int>(std::ceil(extent_y))), 1.0);

  // Spatial kernel for the variance-reduction objective: isotropic over
  // position, scales borrowed from the fitted surface.
  KernelSpec info_kernel;
  info_kernel.family = KernelFamily::SquaredExponential;
  info_kernel.lengthscales = Eigen::VectorXd::Constant(
      1, 0.5 * (surface_kernel.lengthscales[0] + surface_kernel.lengthscales[1]));
  info_kernel.signal_variance = surface_kernel.signal_variance;
  const GaussHermiteScheme scheme = GaussHermiteScheme::make(config.gh_order);

  // Per-query-point variances ride in a 1-row belief; overlays chain the
  // planner's predicted reductions exactly as in occupancy mapping.
  BeliefState prior(n_query, 1, 0.5, info_kernel.signal_variance);

  InformationFn information = [&](const SensedPose& pose, const PoseBelief& pose_belief,
                                  const BeliefOverlayPtr& parent_overlay,
                                  std::optional<double> i_near) {
    auto overlay = std::make_shared<BeliefOverlay>(parent_overlay);
    InfoResult result;
    result.info = i_near.value_or(0.0);
    const std::vector<int> ids = query_index.radius(pose.position, config.sensing_radius);
    if (!ids.empty()) {
      Eigen::MatrixXd points(2, ids.size());
      std::vector<double> variances(ids.size());
      for (std::size_t k = 0; k < ids.size(); ++k) {
        points(0, k) = queries[ids[k]].x;
        points(1, k) = queries[ids[k]].y;
        variances[k] = overlay->variance(ids[k], prior);
      }
      Eigen::MatrixXd train_points = points;
      const int cap = config.max_observation_points;
      if (cap > 0 && static_cast<int>(ids.size()) > cap) {
        train_points.resize(2, cap);
        const double stride = static_cast<double>(ids.size()) / cap;
        for (int k = 0; k < cap; ++k)
          train_points.col(k) = points.col(static_cast<int>(k * stride));
      }
      const Eigen::Matrix2d pose_cov = config.uncertain_inputs
                                           ? pose_belief.position_covariance()
                                           : Eigen::Matrix2d::Zero();
      const VarianceReduction vr = gpvr_variance_reduction(
          train_points, points, variances, info_kernel, config.gp_noise_variance, pose_cov, scheme);
      for (std::size_t k = 0; k < ids.size(); ++k)
        overlay->set(ids[k], {0.5, vr.fused[k]});
      result.info += vr.increment;
    }
    result.overlay = overlay;
    return result;
  };

  MissionLog log;
  Tree tree = iig_tree(world, information, config.planner, &prior);
  const Path path = select_path(tree, config.selection);

  std::set<int> observed;
  for (int id : path.node_ids)
    for (int q : query_index.radius(tree.nodes[id].position, config.sensing_radius))
      observed.insert(q);

  double rmse;
  if (observed.empty()) {
    rmse = std::sqrt((truth_field.array() - signal_mean).square().mean());
  } else {
    std::vector<Point2> obs_pos;
    Eigen::VectorXd obs_val(observed.size());
    int k = 0;
    for (int q : observed) {
      obs_pos.push_back(queries[q]);
      obs_val[k++] = truth_field[q] - signal_mean;
    }
    TrainingSet gathered{field_features(obs_pos, anchor), obs_val, config.gp_noise_variance};
    const GpPrediction recon =
        gp_predict(gathered, field_features(queries, anchor), surface_kernel);
    const Eigen::VectorXd recon_field = recon.means.array() + signal_mean;
    rmse = std::sqrt((recon_field - truth_field).array().square().mean());
  }

  StepRecord record;
  record.step = 0;
  record.pose = config.planner.start;
  record.tree_nodes = static_cast<int>(tree.nodes.size());
  record.trace_length = static_cast<int>(tree.trace.size());
  record.path_ids = path.node_ids;
  for (int id : path.node_ids) record.path_positions.push_back(tree.nodes[id].position);
  record.distance_traveled = path.cost;
  log.steps.push_back(std::move(record));
  log.total_distance = path.cost;
  log.total_info = path.info;
  log.rmse = rmse;
  log.terminated = true;
  log.last_tree = std::move(tree);
  log.last_path = path;
  return log;
}

}  // namespace iig
