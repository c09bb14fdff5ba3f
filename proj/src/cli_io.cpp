#include "iig/cli_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

namespace iig {

namespace {

using Field = std::variant<double*, int*, std::uint64_t*, std::string*>;

struct Entry {
  std::string section;
  std::string key;
  Field field;
};

/// One table drives parsing and emission so the two cannot drift.
std::vector<Entry> key_table(RunConfig& c) {
  return {
      {"world", "file", &c.world_file},
      {"world", "p_occ", &c.p_occ},
      {"world", "p_free", &c.p_free},
      {"planner", "start_x", &c.start_x},
      {"planner", "start_y", &c.start_y},
      {"planner", "start_heading", &c.start_heading},
      {"planner", "steer_step", &c.steer_step},
      {"planner", "near_radius", &c.near_radius},
      {"planner", "budget", &c.budget},
      {"planner", "delta_ric", &c.delta_ric},
      {"planner", "delta_ric_online", &c.delta_ric_online},
      {"planner", "n_ric", &c.n_ric},
      {"planner", "max_samples", &c.max_samples},
      {"planner", "seed", &c.seed},
      {"sensor", "beams", &c.beams},
      {"sensor", "r_max", &c.r_max},
      {"sensor", "z_hit", &c.z_hit},
      {"sensor", "z_short", &c.z_short},
      {"sensor", "z_max", &c.z_max},
      {"sensor", "z_rand", &c.z_rand},
      {"sensor", "sigma_hit", &c.sigma_hit},
      {"sensor", "lambda_short", &c.lambda_short},
      {"sensor", "s_z", &c.s_z},
      {"inverse_model", "b_free", &c.b_free},
      {"inverse_model", "b_occ", &c.b_occ},
      {"inverse_model", "p_sat", &c.p_sat},
      {"inverse_model", "p_sat_online", &c.p_sat_online},
      {"inverse_model", "epsilon", &c.epsilon},
      {"kernel", "family", &c.kernel_family},
      {"kernel", "lengthscale", &c.lengthscale},
      {"kernel", "signal_variance", &c.signal_variance},
      {"kernel", "gp_noise_variance", &c.gp_noise_variance},
      {"kernel", "gh_order", &c.gh_order},
      {"info", "function", &c.info_function},
      {"motion", "q_x", &c.q_x},
      {"motion", "q_y", &c.q_y},
      {"motion", "q_theta", &c.q_theta},
      {"motion", "sigma_init_x", &c.sigma_init_x},
      {"motion", "sigma_init_y", &c.sigma_init_y},
      {"motion", "sigma_init_theta", &c.sigma_init_theta},
      {"selection", "kappa", &c.kappa},
      {"selection", "s_ratio", &c.s_ratio},
      {"mission", "p_sat_term", &c.p_sat_term},
      {"mission", "max_steps", &c.max_steps},
      {"monitoring", "dataset", &c.dataset},
      {"monitoring", "field_extent", &c.field_extent},
      {"monitoring", "synthetic_points", &c.synthetic_points},
      {"monitoring", "tx_power_dbm", &c.tx_power_dbm},
      {"monitoring", "path_loss_exponent", &c.path_loss_exponent},
      {"monitoring", "shadowing_sigma_dbm", &c.shadowing_sigma_dbm},
      {"monitoring", "field_seed", &c.field_seed},
      {"monitoring", "max_train_points", &c.max_train_points},
      {"monitoring", "query_resolution", &c.query_resolution},
      {"monitoring", "sensing_radius", &c.sensing_radius},
      {"monitoring", "noise_variance", &c.monitor_noise_variance},
      {"output", "directory", &c.output_dir},
  };
}

std::string fmt17(double v) {
  if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void assign(const Entry& entry, const std::string& value) {
  std::visit(
      [&](auto* ptr) {
        using T = std::remove_pointer_t<decltype(ptr)>;
        if constexpr (std::is_same_v<T, std::string>) {
          *ptr = value;
        } else if constexpr (std::is_same_v<T, double>) {
          *ptr = std::stod(value);
        } else if constexpr (std::is_same_v<T, int>) {
          *ptr = std::stoi(value);
        } else {
          *ptr = std::stoull(value);
        }
      },
      entry.field);
}

std::string render(const Entry& entry) {
  return std::visit(
      [&](auto* ptr) -> std::string {
        using T = std::remove_pointer_t<decltype(ptr)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return *ptr;
        } else if constexpr (std::is_same_v<T, double>) {
          return fmt17(*ptr);
        } else {
          return std::to_string(*ptr);
        }
      },
      entry.field);
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig config;
  auto table = key_table(config);
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool found = false;
    for (const Entry& entry : table) {
      if (entry.section == section && entry.key == key) {
        assign(entry, value);
        found = true;
        break;
      }
    }
    if (!found)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown key [" +
                               section + "] " + key);
  }
  return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

std::string RunConfig::to_text() const {
  auto table = key_table(const_cast<RunConfig&>(*this));
  std::ostringstream out;
  std::string section;
  for (const Entry& entry : table) {
    if (entry.section != section) {
      if (!section.empty()) out << "\n";
      section = entry.section;
      out << "[" << section << "]\n";
    }
    out << entry.key << " = " << render(entry) << "\n";
  }
  return out.str();
}

SensorModel RunConfig::sensor() const {
  SensorModel m;
  m.beam_count = beams;
  m.r_max = r_max;
  m.z_hit = z_hit;
  m.z_short = z_short;
  m.z_max = z_max;
  m.z_rand = z_rand;
  m.sigma_hit = sigma_hit;
  m.lambda_short = lambda_short;
  m.integration_resolution = s_z;
  return m;
}

InverseModelParams RunConfig::inverse_model(bool online) const {
  InverseModelParams p;
  p.b_free = b_free;
  p.b_occ = b_occ;
  p.p_sat = online ? p_sat_online : p_sat;
  p.epsilon = epsilon;
  return p;
}

KernelSpec RunConfig::kernel() const {
  KernelSpec spec;
  if (kernel_family == "matern52") {
    spec.family = KernelFamily::Matern52;
  } else if (kernel_family == "se") {
    spec.family = KernelFamily::SquaredExponential;
  } else {
    throw std::runtime_error("unknown kernel family: " + kernel_family);
  }
  spec.lengthscales = Eigen::VectorXd::Constant(1, lengthscale);
  spec.signal_variance = signal_variance;
  return spec;
}

InfoFunctionConfig RunConfig::info(bool online) const {
  InfoFunctionConfig cfg;
  cfg.kind = info_kind_from_string(info_function);
  cfg.sensor = sensor();
  cfg.inverse = inverse_model(online);
  cfg.kernel = kernel();
  cfg.scheme = GaussHermiteScheme::make(gh_order);
  cfg.gp_noise_variance = gp_noise_variance;
  return cfg;
}

PlannerConfig RunConfig::planner(bool online) const {
  PlannerConfig pc;
  pc.start = {start_x, start_y};
  pc.start_heading = start_heading;
  pc.delta = steer_step;
  pc.r_near = near_radius;
  pc.budget = budget;
  pc.delta_ric = online ? delta_ric_online : delta_ric;
  pc.n_ric = n_ric;
  pc.max_samples = max_samples;
  pc.seed = seed;
  pc.sigma_init = Eigen::Vector3d(sigma_init_x * sigma_init_x, sigma_init_y * sigma_init_y,
                                  sigma_init_theta * sigma_init_theta)
                      .asDiagonal();
  pc.noise = MotionNoise::from_stddevs(q_x, q_y, q_theta);
  return pc;
}

SelectionParams RunConfig::selection() const { return {kappa, s_ratio}; }

MonitoringConfig RunConfig::monitoring(bool uncertain) const {
  MonitoringConfig mc;
  mc.dataset_csv = dataset;
  mc.field_extent = field_extent;
  mc.synthetic_points = synthetic_points;
  mc.tx_power_dbm = tx_power_dbm;
  mc.path_loss_exponent = path_loss_exponent;
  mc.shadowing_sigma_dbm = shadowing_sigma_dbm;
  mc.field_seed = field_seed;
  mc.max_train_points = max_train_points;
  mc.query_resolution = query_resolution;
  mc.sensing_radius = sensing_radius;
  mc.uncertain_inputs = uncertain;
  mc.gp_noise_variance = monitor_noise_variance;
  mc.gh_order = gh_order;
  mc.planner = planner(false);
  mc.selection = selection();
  return mc;
}

namespace {

double sanitize(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

nlohmann::ordered_json tree_to_json(const Tree& tree) {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const NodeRecord& n : tree.nodes) {
    doc["nodes"].push_back({{"id", n.id},
                            {"x", n.position.x},
                            {"y", n.position.y},
                            {"cost", n.cost},
                            {"info", n.info},
                            {"parent", n.parent}});
  }
  doc["trace"] = nlohmann::ordered_json::array();
  for (const ConvergenceSample& t : tree.trace) {
    doc["trace"].push_back(
        {{"samples", t.samples}, {"iric", t.iric}, {"mean", sanitize(t.mean)}});
  }
  return doc;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_tree_json(const Tree& tree, const std::string& path) {
  write_file(path, tree_to_json(tree).dump(2) + "\n");
}

void write_path_json(const Tree& tree, const Path& path, const std::string& file) {
  nlohmann::ordered_json doc;
  doc["node_ids"] = path.node_ids;
  doc["positions"] = nlohmann::ordered_json::array();
  for (int id : path.node_ids)
    doc["positions"].push_back({tree.nodes[id].position.x, tree.nodes[id].position.y});
  doc["cost"] = path.cost;
  doc["info"] = path.info;
  write_file(file, doc.dump(2) + "\n");
}

void write_convergence_csv(const Tree& tree, const std::string& path) {
  std::ostringstream out;
  out << "sample,iric,mean\n";
  for (const ConvergenceSample& t : tree.trace)
    out << t.samples << "," << fmt17(t.iric) << "," << fmt17(t.mean) << "\n";
  write_file(path, out.str());
}

void write_entropy_csv(const MissionLog& log, const std::string& path) {
  std::ostringstream out;
  out << "step,avg_entropy\n";
  for (const StepRecord& s : log.steps)
    out << s.step << "," << fmt17(s.average_entropy) << "\n";
  write_file(path, out.str());
}

void emit_plan_results(const Tree& tree, const Path& path, const std::string& directory) {
  std::filesystem::create_directories(directory);
  const std::filesystem::path dir(directory);
  write_tree_json(tree, (dir / "tree.json").string());
  write_path_json(tree, path, (dir / "path.json").string());
  write_convergence_csv(tree, (dir / "convergence.csv").string());
  nlohmann::ordered_json summary;
  summary["scenario"] = "plan";
  summary["nodes"] = tree.nodes.size();
  summary["insertions"] = tree.trace.size();
  summary["path_cost"] = path.cost;
  summary["path_info"] = path.info;
  if (!tree.trace.empty()) summary["final_ric_mean"] = sanitize(tree.trace.back().mean);
  write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
}

void emit_mission_results(const MissionLog& log, const std::string& scenario,
                          const std::string& directory) {
  std::filesystem::create_directories(directory);
  const std::filesystem::path dir(directory);
  if (!log.last_tree.nodes.empty()) {
    write_tree_json(log.last_tree, (dir / "tree.json").string());
    write_convergence_csv(log.last_tree, (dir / "convergence.csv").string());
    if (!log.last_path.node_ids.empty())
      write_path_json(log.last_tree, log.last_path, (dir / "path.json").string());
  }
  write_entropy_csv(log, (dir / "entropy.csv").string());
  nlohmann::ordered_json summary;
  summary["scenario"] = scenario;
  summary["steps"] = log.steps.size();
  summary["terminated"] = log.terminated;
  summary["total_distance"] = log.total_distance;
  summary["final_entropy"] = log.final_entropy;
  summary["total_info"] = log.total_info;
  if (scenario == "exploration") summary["auc"] = log.auc;
  if (scenario == "monitoring") summary["rmse"] = log.rmse;
  if (!log.abort_reason.empty()) summary["abort_reason"] = log.abort_reason;
  write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
}

namespace {

GridWorld load_world_or_die(const std::string& path) {
  if (path.empty()) throw CLI::ValidationError("world", "no world file given");
  if (!std::filesystem::exists(path))
    throw CLI::ValidationError("world", "world file not found: " + path);
  return GridWorld::load(path);
}

ExplorationConfig build_exploration(const RunConfig& rc, const GridWorld& world) {
  ExplorationConfig ec{world,
                       rc.planner(true),
                       rc.info(true),
                       rc.inverse_model(false),
                       rc.selection(),
                       rc.p_sat_term,
                       rc.max_steps,
                       std::nullopt};
  return ec;
}

int run_plan(const RunConfig& rc, int rig_samples, const std::string& out_dir) {
  const GridWorld world = load_world_or_die(rc.world_file);
  BeliefState belief = BeliefState::from_world(world, rc.p_occ, rc.p_free);
  const InfoFunctionConfig info = rc.info(false);
  const InformationFn fn = make_information_fn(info, world, belief);
  PlannerConfig pc = rc.planner(false);
  pc.max_gain_hint = max_information_gain_hint(info, world.resolution());
  const Tree tree = rig_samples > 0 ? rig_tree(world, fn, pc, rig_samples, &belief)
                                    : iig_tree(world, fn, pc, &belief);
  const Path path = select_path(tree, rc.selection());
  emit_plan_results(tree, path, out_dir);
  return 0;
}

int run_explore(const RunConfig& rc, const std::string& out_dir) {
  const GridWorld world = load_world_or_die(rc.world_file);
  const MissionLog log = run_exploration(build_exploration(rc, world));
  emit_mission_results(log, "exploration", out_dir);
  return log.abort_reason.empty() ? 0 : 1;
}

int run_monitor(const RunConfig& rc, bool uncertain, const std::string& out_dir) {
  if (!rc.dataset.empty() && !std::filesystem::exists(rc.dataset))
    throw CLI::ValidationError("dataset", "dataset file not found: " + rc.dataset);
  const MissionLog log = run_monitoring(rc.monitoring(uncertain));
  emit_mission_results(log, "monitoring", out_dir);
  return 0;
}

int run_bench(const RunConfig& base, const std::string& mode, int seeds,
              const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ostringstream csv;
  csv << "mode,setting,seed,nodes,insertions,info,cost,rmse\n";
  auto planning_row = [&](double setting, const RunConfig& rc) {
    const GridWorld world = load_world_or_die(rc.world_file);
    BeliefState belief = BeliefState::from_world(world, rc.p_occ, rc.p_free);
    const InfoFunctionConfig info = rc.info(false);
    PlannerConfig pc = rc.planner(false);
    pc.max_gain_hint = max_information_gain_hint(info, world.resolution());
    const Tree tree = iig_tree(world, make_information_fn(info, world, belief), pc, &belief);
    const Path path = select_path(tree, rc.selection());
    csv << mode << "," << fmt17(setting) << "," << rc.seed << "," << tree.nodes.size() << ","
        << tree.trace.size() << "," << fmt17(path.info) << "," << fmt17(path.cost) << ",\n";
  };
  for (int s = 0; s < seeds; ++s) {
    RunConfig rc = base;
    rc.seed = base.seed + static_cast<std::uint64_t>(s);
    if (mode == "beams") {
      for (int beams : {10, 20, 30, 40, 50}) {
        RunConfig row = rc;
        row.beams = beams;
        planning_row(beams, row);
      }
    } else if (mode == "range") {
      for (double range : {5.0, 10.0, 15.0, 20.0}) {
        RunConfig row = rc;
        row.r_max = range;
        planning_row(range, row);
      }
    } else if (mode == "radius") {
      for (double radius : {5.0, 10.0, 20.0}) {
        RunConfig row = rc;
        row.sensing_radius = radius;
        row.seed = rc.seed;
        const MissionLog log = run_monitoring(row.monitoring(false));
        csv << mode << "," << fmt17(radius) << "," << row.seed << ","
            << log.last_tree.nodes.size() << "," << log.last_tree.trace.size() << ","
            << fmt17(log.total_info) << "," << fmt17(log.total_distance) << ","
            << fmt17(log.rmse) << "\n";
      }
    } else {
      throw CLI::ValidationError("mode", "unknown bench mode: " + mode);
    }
  }
  write_file((std::filesystem::path(out_dir) / "bench.csv").string(), csv.str());
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Incremental informative motion planning toolkit"};
  app.require_subcommand(1);

  std::string config_path, world_path, out_dir, info_name, dataset_path;
  std::uint64_t seed = 0;
  bool have_seed = false;
  int samples = 0, steps = 0, bench_seeds = 10;
  double radius = 0.0;
  bool uncertain = false;
  std::string bench_mode = "beams";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file (key = value sections)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { seed = v; have_seed = true; }, "rng seed");
  };

  CLI::App* plan = app.add_subcommand("plan", "grow one planning tree on a known world");
  add_common(plan);
  plan->add_option("--world", world_path, "world text file");
  plan->add_option("--info", info_name, "information function: mi|miub|gpvr|ugpvr");
  plan->add_option("--samples", samples, "fixed sample count (0 = run to convergence)");

  CLI::App* explore = app.add_subcommand("explore", "entropy-terminated exploration mission");
  add_common(explore);
  explore->add_option("--world", world_path, "world text file");
  explore->add_option("--info", info_name, "information function");
  explore->add_option("--steps", steps, "mission step limit");

  CLI::App* monitor = app.add_subcommand("monitor", "signal-strength monitoring mission");
  add_common(monitor);
  monitor->add_option("--dataset", dataset_path, "lat,lon,rssi_dbm CSV (default: synthetic)");
  monitor->add_option("--radius", radius, "sensing radius, meters");
  monitor->add_flag("--uncertain", uncertain, "propagate pose uncertainty (UGPVR)");

  CLI::App* bench = app.add_subcommand("bench", "seed sweeps with aggregate CSV output");
  add_common(bench);
  bench->add_option("--world", world_path, "world text file");
  bench->add_option("--mode", bench_mode, "sweep: beams|range|radius");
  bench->add_option("--seeds", bench_seeds, "seeds per setting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig rc = config_path.empty() ? RunConfig() : RunConfig::from_file(config_path);
    if (have_seed) rc.seed = seed;
    if (!world_path.empty()) rc.world_file = world_path;
    if (!info_name.empty()) rc.info_function = info_name;
    if (!dataset_path.empty()) rc.dataset = dataset_path;
    if (radius > 0.0) rc.sensing_radius = radius;
    if (steps > 0) rc.max_steps = steps;
    if (out_dir.empty()) out_dir = rc.output_dir;

    if (plan->parsed()) return run_plan(rc, samples, out_dir);
    if (explore->parsed()) return run_explore(rc, out_dir);
    if (monitor->parsed()) return run_monitor(rc, uncertain, out_dir);
    return run_bench(rc, bench_mode, bench_seeds, out_dir);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    // Configuration and input-file problems; anything else is a bug.
    const std::string msg = e.what();
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    const bool config_problem = msg.find("config") != std::string::npos ||
                                msg.find("cannot open") != std::string::npos ||
                                msg.find("unknown") != std::string::npos;
    return config_problem ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace iig
