#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "iig/cli_io.hpp"
#include "iig/mission.hpp"
#include "json.hpp"

using namespace iig;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("iig_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int value = 0;
    return value;
  }
};

GridWorld room_world() {
  GridWorld world(30, 30, 0.2);  // 6 m x 6 m
  for (int i = 0; i < 30; ++i) {
    world.set_occupied(i, 0, true);
    world.set_occupied(i, 29, true);
    world.set_occupied(0, i, true);
    world.set_occupied(29, i, true);
  }
  for (int y = 8; y < 22; ++y) world.set_occupied(15, y, true);
  return world;
}

}  // namespace

TEST_SUITE("mission") {

TEST_CASE("haversine matches reference distances") {
  // One degree of latitude along a meridian: pi/180 * 6371000 m.
  CHECK(haversine_distance(10.0, 20.0, 11.0, 20.0) ==
        doctest::Approx(M_PI / 180.0 * 6371000.0).epsilon(1e-9));
  CHECK(haversine_distance(45.0, 7.0, 45.0, 7.0) == doctest::Approx(0.0));
  // Quarter circumference: pole to equator.
  CHECK(haversine_distance(0.0, 0.0, 90.0, 0.0) ==
        doctest::Approx(0.5 * M_PI * 6371000.0).epsilon(1e-9));
  // Symmetry.
  CHECK(haversine_distance(48.85, 2.35, 51.5, -0.12) ==
        doctest::Approx(haversine_distance(51.5, -0.12, 48.85, 2.35)));
}

TEST_CASE("scan simulation is deterministic and respects geometry") {
  const GridWorld world = room_world();
  SensorModel sensor;
  SensedPose pose{{1.0, 1.0}, 0.3};
  SeededRng a(5), b(5);
  const std::vector<double> ranges_a = simulate_scan(world, pose, sensor, a);
  const std::vector<double> ranges_b = simulate_scan(world, pose, sensor, b);
  CHECK(ranges_a == ranges_b);
  REQUIRE(static_cast<int>(ranges_a.size()) == sensor.beam_count);
  for (double r : ranges_a) {
    CHECK(r >= 0.0);
    CHECK(r <= sensor.r_max);
  }
  CHECK_THROWS(simulate_scan(world, {{3.0, 3.0}, 0.0}, sensor, a));  // inside the wall
}

TEST_CASE("applying a scan pulls belief toward the ground truth") {
  const GridWorld world = room_world();
  BeliefState belief(30, 30, 0.5, 1.0);
  SensorModel sensor;
  InverseModelParams params;
  SeededRng rng(9);
  const SensedPose pose{{1.5, 3.0}, 0.0};
  for (int i = 0; i < 15; ++i) {
    const std::vector<double> ranges = simulate_scan(world, pose, sensor, rng);
    apply_scan(belief, world, pose, sensor, params, ranges);
  }
  // The wall segment directly east of the pose should look occupied, the
  // free corridor in between free.
  const int wall = world.index_of(15, 15);
  const int corridor = world.index_of(10, 15);
  CHECK(belief.occupancy(wall) > 0.9);
  CHECK(belief.occupancy(corridor) < 0.1);
}

TEST_CASE("occupancy AUC: perfect beliefs score 1, uninformative ones 0.5") {
  const GridWorld world = room_world();
  const BeliefState perfect = BeliefState::from_world(world, 0.95, 0.05);
  CHECK(occupancy_auc(perfect, world) == doctest::Approx(1.0).epsilon(1e-6));
  const BeliefState flat(30, 30, 0.5, 1.0);
  CHECK(occupancy_auc(flat, world) == doctest::Approx(0.5).epsilon(1e-6));
  BeliefState inverted = BeliefState::from_world(world, 0.05, 0.95);
  CHECK(occupancy_auc(inverted, world) < 0.1);
}

TEST_CASE("wss dataset loads and converts to local metric coordinates") {
  TempDir tmp;
  const fs::path csv = tmp.path / "wss.csv";
  {
    std::ofstream out(csv);
    out << "lat,lon,rssi_dbm\n";
    out << "10.0,20.0,-50.0\n";
    out << "10.001,20.0,-60.0\n";
    out << "10.0,20.001,-70.0\n";
  }
  const WssDataset data = WssDataset::load_csv(csv.string());
  REQUIRE(data.records.size() == 3);
  CHECK(data.records[1].signal_dbm == doctest::Approx(-60.0));
  const std::vector<Point2> pts = data.metric_positions();
  CHECK(pts[0].x == doctest::Approx(0.0));
  CHECK(pts[0].y == doctest::Approx(0.0));
  // 0.001 deg of latitude = ~111.19 m.
  CHECK(pts[1].y == doctest::Approx(111.19).epsilon(1e-3));
  CHECK(pts[1].x == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(pts[2].x > 100.0);  // longitude step scaled by cos(latitude)
}

TEST_CASE("exploration on a small room terminates under the entropy bound") {
  ExplorationConfig config{room_world()};
  config.planner.start = {1.0, 1.0};
  config.planner.budget = 8.0;
  config.planner.delta_ric = 1e-2;
  config.planner.seed = 4;
  config.info.kind = InfoFunctionKind::MIUB;
  config.info.inverse.p_sat = 0.3;
  config.max_steps = 120;
  const MissionLog log = run_exploration(config);
  CHECK(log.terminated);
  CHECK(log.final_entropy <= cell_entropy(config.p_sat_term) + 1e-12);
  CHECK(log.auc > 0.8);
  CHECK(!log.steps.empty());
  CHECK(log.total_distance > 0.0);
  // Entropy at the recorded steps never rises above the initial prior.
  for (const StepRecord& step : log.steps) CHECK(step.average_entropy <= std::log(2.0) + 1e-12);
}

}  // TEST_SUITE

TEST_SUITE("cli_io") {

TEST_CASE("run config text round-trips exactly") {
  RunConfig config;
  config.seed = 12345;
  config.lengthscale = 3.2623;
  config.delta_ric = 5e-4;
  config.world_file = "worlds/desk.world";
  const std::string text = config.to_text();
  const RunConfig back = RunConfig::from_text(text);
  CHECK(back.to_text() == text);
  CHECK(back.seed == 12345);
  CHECK(back.lengthscale == 3.2623);
  CHECK(back.delta_ric == 5e-4);
  CHECK(back.world_file == "worlds/desk.world");
}

TEST_CASE("config parsing tolerates comments and rejects unknown keys") {
  const RunConfig config = RunConfig::from_text(
      "# comment\n[planner]\nbudget = 17.5\n\n[sensor]\nbeams = 25\n");
  CHECK(config.budget == 17.5);
  CHECK(config.beams == 25);
  CHECK_THROWS(RunConfig::from_text("[planner]\nno_such_key = 1\n"));
}

TEST_CASE("emitted artifacts round-trip with 17 significant digits") {
  TempDir tmp;
  GridWorld world(10, 10, 0.5);
  BeliefState scratch(10, 10, 0.5, 1.0);
  InfoFunctionConfig info;
  info.kind = InfoFunctionKind::MIUB;
  info.sensor.r_max = 2.0;
  PlannerConfig pc;
  pc.start = {2.5, 2.5};
  pc.budget = 6.0;
  pc.delta_ric = 1e-2;
  pc.seed = 8;
  const Tree tree = iig_tree(world, make_information_fn(info, world, scratch), pc, &scratch);
  const Path path = select_path(tree, {});
  emit_plan_results(tree, path, tmp.path.string());

  // tree.json: exact double round-trip through the serialized text.
  const auto doc = nlohmann::json::parse(read_file(tmp.path / "tree.json"));
  REQUIRE(doc["nodes"].size() == tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = doc["nodes"][i];
    CHECK(n["id"].get<int>() == tree.nodes[i].id);
    CHECK(n["x"].get<double>() == tree.nodes[i].position.x);
    CHECK(n["y"].get<double>() == tree.nodes[i].position.y);
    CHECK(n["cost"].get<double>() == tree.nodes[i].cost);
    CHECK(n["info"].get<double>() == tree.nodes[i].info);
    CHECK(n["parent"].get<int>() == tree.nodes[i].parent);
  }
  REQUIRE(doc["trace"].size() == tree.trace.size());
  for (std::size_t i = 0; i < tree.trace.size(); ++i) {
    CHECK(doc["trace"][i]["samples"].get<int>() == tree.trace[i].samples);
    CHECK(doc["trace"][i]["iric"].get<double>() == tree.trace[i].iric);
  }

  // convergence.csv: parse every row back and compare bitwise.
  std::ifstream csv(tmp.path / "convergence.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "sample,iric,mean");
  std::size_t row = 0;
  while (std::getline(csv, line)) {
    REQUIRE(row < tree.trace.size());
    std::istringstream fields(line);
    std::string sample, iric, mean;
    std::getline(fields, sample, ',');
    std::getline(fields, iric, ',');
    std::getline(fields, mean, ',');
    CHECK(std::stoi(sample) == tree.trace[row].samples);
    CHECK(std::stod(iric) == tree.trace[row].iric);
    if (std::isfinite(tree.trace[row].mean)) CHECK(std::stod(mean) == tree.trace[row].mean);
    ++row;
  }
  CHECK(row == tree.trace.size());

  // summary.json exists and is valid JSON.
  const auto summary = nlohmann::json::parse(read_file(tmp.path / "summary.json"));
  CHECK(summary["scenario"] == "plan");
  CHECK(summary["nodes"].get<int>() == static_cast<int>(tree.nodes.size()));
}

TEST_CASE("world files loaded through the CLI helpers surface IO errors") {
  CHECK_THROWS(GridWorld::load("/definitely/not/here.world"));
  CHECK_THROWS(RunConfig::from_file("/definitely/not/here.cfg"));
}

TEST_CASE("cli_main rejects bad usage without crashing") {
  const char* argv_bad[] = {"iig", "plan", "--world", "/definitely/not/here.world"};
  CHECK(cli_main(4, argv_bad) == 2);
  const char* argv_none[] = {"iig"};
  CHECK(cli_main(1, argv_none) != 0);
}

}  // TEST_SUITE
