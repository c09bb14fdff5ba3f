#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iig/path_selection.hpp"
#include "iig/planner.hpp"

namespace iig {

/// One mixture-model range draw per beam from the ground-truth map.
std::vector<double> simulate_scan(const GridWorld& truth, const SensedPose& pose,
                                  const SensorModel& sensor, SeededRng& rng);

/// Inverse-model belief update from measured beam ranges: cells traversed
/// before each return are relaxed toward free, the return cell toward
/// occupied (no occupied cell for max-range readings).
void apply_scan(BeliefState& belief, const GridWorld& geometry, const SensedPose& pose,
                const SensorModel& sensor, const InverseModelParams& params,
                const std::vector<double>& ranges);

/// ROC area for occupancy probabilities against ground-truth cells,
/// trapezoid rule over evenly spaced thresholds.
double occupancy_auc(const BeliefState& belief, const GridWorld& truth, int thresholds = 200);

/// Great-circle distance in meters, Earth radius 6 371 000 m.
double haversine_distance(double lat_a_deg, double lon_a_deg, double lat_b_deg,
                          double lon_b_deg);

struct StepRecord {
  int step = 0;
  Point2 pose;
  double heading = 0.0;
  double average_entropy = 0.0;
  int tree_nodes = 0;
  int trace_length = 0;
  std::vector<int> path_ids;
  std::vector<Point2> path_positions;
  double distance_traveled = 0.0;  // cumulative after executing this step's path
};

struct MissionLog {
  std::vector<StepRecord> steps;
  double total_distance = 0.0;
  double final_entropy = 0.0;
  bool terminated = false;  // entropy bound reached (exploration) / plan done (monitoring)
  std::string abort_reason;
  double auc = 0.0;   // exploration only
  double rmse = 0.0;  // monitoring only, dBm
  double total_info = 0.0;
  Tree last_tree;     // tree from the final planning episode
  Path last_path;
};

struct ExplorationConfig {
  GridWorld world;               // ground truth
  PlannerConfig planner;         // start pose, steer step, budget, RIC settings
  InfoFunctionConfig info;       // estimator used inside the planner
  InverseModelParams map_update; // inverse model for real-scan belief updates
  SelectionParams selection;
  double p_sat_term = 0.1;       // mission stops when avg entropy <= H(p_sat_term)
  int max_steps = 300;
  std::optional<BeliefState> initial_belief;  // defaults to uniform 0.5
};

MissionLog run_exploration(const ExplorationConfig& config);

struct WssRecord {
  double latitude = 0.0;
  double longitude = 0.0;
  double signal_dbm = 0.0;
};

struct WssDataset {
  std::vector<WssRecord> records;

  static WssDataset load_csv(const std::string& path);  // header line `lat,lon,rssi_dbm`
  /// Local metric coordinates (meters) via haversine against the minimum
  /// latitude/longitude corner.
  std::vector<Point2> metric_positions() const;
};

struct MonitoringConfig {
  std::string dataset_csv;        // empty -> synthetic log-distance field
  double field_extent = 100.0;    // synthetic field side length, meters
  int synthetic_points = 267;     // generated measurement count
  double tx_power_dbm = -30.0;    // signal at 1 m from the source
  double path_loss_exponent = 2.5;
  double shadowing_sigma_dbm = 2.0;
  std::uint64_t field_seed = 99;

  int max_train_points = 267;     // uniform-stride downsample cap
  double query_resolution = 2.0;  // meters between query points
  double sensing_radius = 10.0;
  // Per-evaluation cap on predicted observations inside the sensing disc.
  // The fitted lengthscales are far larger than the query spacing, so a
  // strided subset gives an almost identical posterior at a fraction of the
  // Gram/Cholesky cost.
  int max_observation_points = 48;
  bool uncertain_inputs = false;  // GPVR vs UGPVR
  double gp_noise_variance = 1.0; // dBm^2
  int gh_order = 11;
  PlannerConfig planner;
  SelectionParams selection;
};

MissionLog run_monitoring(const MonitoringConfig& config);

}  // namespace iig
