#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "iig/path_selection.hpp"
#include "iig/planner.hpp"

using namespace iig;

namespace {

GridWorld open_world() {
  GridWorld world(20, 20, 0.5);  // 10 m x 10 m free space
  return world;
}

PlannerConfig small_config(std::uint64_t seed) {
  PlannerConfig config;
  config.start = {5.0, 5.0};
  config.delta = 1.0;
  config.r_near = 2.5;
  config.budget = 12.0;
  config.delta_ric = 1e-2;
  config.n_ric = 30;
  config.max_samples = 5000;
  config.seed = seed;
  return config;
}

InfoFunctionConfig miub_config() {
  InfoFunctionConfig config;
  config.kind = InfoFunctionKind::MIUB;
  config.sensor.beam_count = 10;
  config.sensor.r_max = 3.0;
  return config;
}

void audit_tree(const Tree& tree, const PlannerConfig& config) {
  REQUIRE(!tree.nodes.empty());
  CHECK(tree.nodes[0].parent == -1);
  CHECK(tree.nodes[0].cost == doctest::Approx(0.0));
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    const NodeRecord& node = tree.nodes[i];
    REQUIRE(node.parent >= 0);
    REQUIRE(node.parent < static_cast<int>(i));  // parents precede children
    const NodeRecord& parent = tree.nodes[node.parent];
    // Additive cost along the edge.
    CHECK(node.cost ==
          doctest::Approx(parent.cost + distance(parent.position, node.position)));
    // Information accumulates (every estimator's increment is >= 0).
    CHECK(node.info >= parent.info - 1e-9);
    // Extended nodes never start beyond the budget.
    CHECK(parent.cost <= config.budget + 1e-9);
    // Steering bounds the edge length.
    CHECK(distance(parent.position, node.position) <= config.delta + 1e-9);
  }
}

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("penalized RIC formula") {
  CHECK(compute_ric(2.0, 1.0, 1) == doctest::Approx(1.0));
  CHECK(compute_ric(2.0, 1.0, 4) == doctest::Approx(0.25));
  CHECK(compute_ric(1.0, 1.0, 7) == doctest::Approx(0.0));
  CHECK(compute_ric(3.0, 2.0, 2) == doctest::Approx(0.25));
}

TEST_CASE("ric window reports infinity until full, then a sliding mean") {
  RicWindow window(3);
  window.append(3.0);
  CHECK(std::isinf(window.mean()));
  window.append(6.0);
  CHECK(std::isinf(window.mean()));
  window.append(0.0);
  CHECK(window.mean() == doctest::Approx(3.0));
  window.append(0.0);  // evicts the 3.0
  CHECK(window.mean() == doctest::Approx(2.0));
  CHECK(average_ric(window) == doctest::Approx(2.0));
}

TEST_CASE("domination rule truth table") {
  NodeRecord candidate;
  candidate.cost = 5.0;
  candidate.info = 10.0;

  NodeRecord cheaper_better;
  cheaper_better.cost = 4.0;
  cheaper_better.info = 11.0;
  NodeRecord cheaper_worse;
  cheaper_worse.cost = 4.0;
  cheaper_worse.info = 8.0;
  NodeRecord pricier_better;
  pricier_better.cost = 6.0;
  pricier_better.info = 12.0;
  NodeRecord equal;
  equal.cost = 5.0;
  equal.info = 10.0;

  CHECK(prune(candidate, {&cheaper_better}));
  CHECK_FALSE(prune(candidate, {&cheaper_worse}));
  CHECK_FALSE(prune(candidate, {&pricier_better}));
  CHECK(prune(candidate, {&equal}));  // ties count as dominated
  CHECK_FALSE(prune(candidate, {}));
  CHECK(prune(candidate, {&cheaper_worse, &equal}));

  // The tolerance relaxes the information side only.
  NodeRecord near_tie;
  near_tie.cost = 4.5;
  near_tie.info = 9.9;  // 1% below, within a 2% slack
  CHECK_FALSE(prune(candidate, {&near_tie}, 0.0));
  CHECK(prune(candidate, {&near_tie}, 0.02));
}

TEST_CASE("rig_tree grows within its sample budget and audits clean") {
  const GridWorld world = open_world();
  BeliefState belief(20, 20, 0.5, 1.0);
  const InfoFunctionConfig info = miub_config();
  PlannerConfig config = small_config(3);
  const InformationFn fn = make_information_fn(info, world, belief);
  const Tree tree = rig_tree(world, fn, config, 400);
  CHECK(tree.nodes.size() >= 2);
  // Each sample can extend from every near neighbour, so the cap is one
  // insertion per (sample, near node) pair plus the root.
  CHECK(tree.nodes.size() <= static_cast<std::size_t>(400 * config.near_cap + 1));
  audit_tree(tree, config);
}

TEST_CASE("iig_tree converges and its trace mirrors the insertions") {
  const GridWorld world = open_world();
  BeliefState belief(20, 20, 0.5, 1.0);
  BeliefState scratch = belief;
  const InfoFunctionConfig info = miub_config();
  PlannerConfig config = small_config(7);
  const InformationFn fn = make_information_fn(info, world, scratch);
  const Tree tree = iig_tree(world, fn, config, &scratch);
  audit_tree(tree, config);
  REQUIRE(!tree.trace.empty());
  CHECK(tree.trace.size() == tree.nodes.size() - 1);  // one row per insertion
  CHECK(tree.trace.back().mean < config.delta_ric);
  // Sample counters are nondecreasing and the window mean is +inf until
  // n_ric insertions have landed.
  for (std::size_t i = 1; i < tree.trace.size(); ++i)
    CHECK(tree.trace[i].samples >= tree.trace[i - 1].samples);
  for (std::size_t i = 0; i + 1 < tree.trace.size() &&
                          i + 1 < static_cast<std::size_t>(config.n_ric);
       ++i)
    CHECK(std::isinf(tree.trace[i].mean));
}

TEST_CASE("identical seeds grow identical trees") {
  const GridWorld world = open_world();
  const InfoFunctionConfig info = miub_config();
  PlannerConfig config = small_config(11);
  Tree a, b;
  {
    BeliefState scratch(20, 20, 0.5, 1.0);
    a = iig_tree(world, make_information_fn(info, world, scratch), config, &scratch);
  }
  {
    BeliefState scratch(20, 20, 0.5, 1.0);
    b = iig_tree(world, make_information_fn(info, world, scratch), config, &scratch);
  }
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].position.x == b.nodes[i].position.x);
    CHECK(a.nodes[i].position.y == b.nodes[i].position.y);
    CHECK(a.nodes[i].info == b.nodes[i].info);
    CHECK(a.nodes[i].cost == b.nodes[i].cost);
  }
}

TEST_CASE("information gains diminish as the tree saturates the map") {
  const GridWorld world = open_world();
  BeliefState scratch(20, 20, 0.5, 1.0);
  const InfoFunctionConfig info = miub_config();
  PlannerConfig config = small_config(13);
  const Tree tree = iig_tree(world, make_information_fn(info, world, scratch), config, &scratch);
  REQUIRE(tree.trace.size() >= 60);
  // Mean raw RIC over the first 30 insertions dwarfs the mean over the
  // last 30: the shared predicted map saturates, so later nodes add less.
  auto mean_ric = [&](std::size_t lo, std::size_t hi) {
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += tree.trace[i].iric;
    return sum / (hi - lo);
  };
  const double early = mean_ric(0, 30);
  const double late = mean_ric(tree.trace.size() - 30, tree.trace.size());
  CHECK(late < 0.5 * early);
}

TEST_CASE("all sampled nodes respect the planning budget when extended") {
  const GridWorld world = open_world();
  BeliefState scratch(20, 20, 0.5, 1.0);
  const InfoFunctionConfig info = miub_config();
  PlannerConfig config = small_config(17);
  config.budget = 6.0;
  const Tree tree = iig_tree(world, make_information_fn(info, world, scratch), config, &scratch);
  for (const NodeRecord& node : tree.nodes) {
    if (node.parent >= 0) CHECK(tree.nodes[node.parent].cost <= config.budget + 1e-9);
    // A single steer step past the budget is the worst case.
    CHECK(node.cost <= config.budget + config.delta + 1e-9);
  }
}

TEST_CASE("obstacles are never crossed by tree edges") {
  GridWorld world(20, 20, 0.5);
  for (int y = 2; y < 18; ++y) world.set_occupied(10, y, true);  // vertical wall
  BeliefState scratch = BeliefState::from_world(world, 0.65, 0.35);
  const InfoFunctionConfig info = miub_config();
  PlannerConfig config = small_config(19);
  config.start = {2.0, 5.0};
  const Tree tree = iig_tree(world, make_information_fn(info, world, scratch), config, &scratch);
  for (const NodeRecord& node : tree.nodes) {
    if (node.parent < 0) continue;
    CHECK(no_collision(tree.nodes[node.parent].position, node.position, world));
  }
}

}  // TEST_SUITE

TEST_SUITE("path_selection") {

namespace {

// Hand-built tree:            0
//                            / \
//                           1   4
//                          / \
//                         2   3
Tree handmade_tree() {
  Tree tree;
  auto add = [&](int id, double x, double y, double cost, double info, int parent) {
    NodeRecord node;
    node.id = id;
    node.position = {x, y};
    node.cost = cost;
    node.info = info;
    node.parent = parent;
    tree.nodes.push_back(node);
  };
  add(0, 0.0, 0.0, 0.0, 0.0, -1);
  add(1, 1.0, 0.0, 1.0, 2.0, 0);
  add(2, 2.0, 0.5, 2.1, 3.0, 1);
  add(3, 2.0, -0.5, 2.1, 4.0, 1);
  add(4, -1.0, 0.0, 1.0, 1.0, 0);
  return tree;
}

}  // namespace

TEST_CASE("path enumeration yields one path per leaf in DFS order") {
  const Tree tree = handmade_tree();
  const std::vector<Path> paths = enumerate_paths(tree);
  REQUIRE(paths.size() == 3);
  CHECK(paths[0].node_ids == std::vector<int>{0, 1, 2});
  CHECK(paths[1].node_ids == std::vector<int>{0, 1, 3});
  CHECK(paths[2].node_ids == std::vector<int>{0, 4});
  CHECK(paths[0].cost == doctest::Approx(2.1));
  CHECK(paths[0].info == doctest::Approx(3.0));
  CHECK(paths[2].leaf() == 4);
}

TEST_CASE("similarity counts shared node ids") {
  const Tree tree = handmade_tree();
  const std::vector<Path> paths = enumerate_paths(tree);
  CHECK(similar_nodes(paths[0], paths[1]) == 2);  // root and node 1
  CHECK(similar_nodes(paths[0], paths[2]) == 1);  // root only
  CHECK(similar_nodes(paths[0], paths[0]) == 3);
}

TEST_CASE("selection votes for the informative branch") {
  const Tree tree = handmade_tree();
  SelectionParams params;
  params.kappa = 0.4;   // path 0-4 (2 nodes < 0.4*3) is filtered out
  params.s_ratio = 0.6;
  const Path chosen = select_path(tree, params);
  // Paths {0,1,2} and {0,1,3} share 2/3 of their nodes, above s_ratio, so
  // they vote for each other; the higher-information one must win.
  CHECK(chosen.node_ids == std::vector<int>{0, 1, 3});
}

TEST_CASE("root-only tree selects the trivial path") {
  Tree tree;
  NodeRecord root;
  root.parent = -1;
  tree.nodes.push_back(root);
  const Path p = select_path(tree, {});
  CHECK(p.node_ids == std::vector<int>{0});
  CHECK(p.cost == doctest::Approx(0.0));
}

}  // TEST_SUITE
