#pragma once

#include <string>

#include "iig/mission.hpp"

namespace iig {

/// Flat configuration covering every module, `key = value` lines under
/// `[section]` headers. Defaults reproduce the reference parameter set.
struct RunConfig {
  // [world]
  std::string world_file;
  double p_occ = 0.65;
  double p_free = 0.35;

  // [planner]
  double start_x = 10.0;
  double start_y = 2.0;
  double start_heading = 0.0;
  double steer_step = 1.0;
  double near_radius = 2.5;
  double budget = 30.0;
  double delta_ric = 5e-4;
  double delta_ric_online = 1e-2;
  int n_ric = 30;
  int max_samples = 200000;
  std::uint64_t seed = 1;

  // [sensor]
  int beams = 10;
  double r_max = 5.0;
  double z_hit = 0.7;
  double z_short = 0.1;
  double z_max = 0.1;
  double z_rand = 0.1;
  double sigma_hit = 0.05;
  double lambda_short = 0.2;
  double s_z = 2.0;

  // [inverse_model]
  double b_free = 0.6;
  double b_occ = 1.66;
  double p_sat = 0.05;
  double p_sat_online = 0.3;
  double epsilon = 0.0005;

  // [kernel]
  std::string kernel_family = "matern52";
  double lengthscale = 3.2623;
  double signal_variance = 0.1879;
  double gp_noise_variance = 0.1;
  int gh_order = 11;

  // [info]
  std::string info_function = "miub";

  // [motion]
  double q_x = 0.1;
  double q_y = 0.1;
  double q_theta = 0.0026;
  double sigma_init_x = 0.4;
  double sigma_init_y = 0.1;
  double sigma_init_theta = 0.0;

  // [selection]
  double kappa = 0.4;
  double s_ratio = 0.6;

  // [mission]
  double p_sat_term = 0.1;
  int max_steps = 300;

  // [monitoring]
  std::string dataset;
  double field_extent = 100.0;
  int synthetic_points = 267;
  double tx_power_dbm = -30.0;
  double path_loss_exponent = 2.5;
  double shadowing_sigma_dbm = 2.0;
  std::uint64_t field_seed = 99;
  int max_train_points = 267;
  double query_resolution = 2.0;
  double sensing_radius = 10.0;
  double monitor_noise_variance = 1.0;

  // [output]
  std::string output_dir = "out";

  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  /// Every key under its section, values at 17 significant digits;
  /// from_text(to_text()) reproduces the config exactly.
  std::string to_text() const;

  SensorModel sensor() const;
  InverseModelParams inverse_model(bool online) const;
  KernelSpec kernel() const;
  InfoFunctionConfig info(bool online) const;
  PlannerConfig planner(bool online) const;
  SelectionParams selection() const;
  MonitoringConfig monitoring(bool uncertain) const;
};

/// tree.json: nodes [{id,x,y,cost,info,parent}] and trace [{samples,iric,mean}].
void write_tree_json(const Tree& tree, const std::string& path);
/// path.json: node ids, positions, cost, info.
void write_path_json(const Tree& tree, const Path& path, const std::string& file);
/// convergence.csv: sample,iric,mean per insertion.
void write_convergence_csv(const Tree& tree, const std::string& path);
/// entropy.csv: step,avg_entropy per mission step.
void write_entropy_csv(const MissionLog& log, const std::string& path);

/// Full result bundle for a standalone planning episode.
void emit_plan_results(const Tree& tree, const Path& path, const std::string& directory);
/// Full result bundle for a mission (exploration or monitoring).
void emit_mission_results(const MissionLog& log, const std::string& scenario,
                          const std::string& directory);

/// `plan`, `explore`, `monitor`, `bench` subcommands. Exit 0 on success,
/// 2 on configuration/usage errors, 1 on runtime failures.
int cli_main(int argc, const char* const* argv);

}  // namespace iig
