#include "iig/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace iig {

namespace {
constexpr double kInfoNearFloor = 1e-9;
}

double compute_ric(double info_new, double info_near, int n_samples) {
  if (info_near <= 0.0) throw std::invalid_argument("compute_ric: info_near must be positive");
  if (n_samples < 1) throw std::invalid_argument("compute_ric: n_samples must be >= 1");
  return (info_new / info_near - 1.0) / static_cast<double>(n_samples);
}

RicWindow::RicWindow(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("RicWindow: capacity must be >= 1");
}

void RicWindow::append(double value) {
  values_.push_back(value);
  if (static_cast<int>(values_.size()) > capacity_) values_.pop_front();
}

double RicWindow::mean() const {
  if (static_cast<int>(values_.size()) < capacity_)
    return std::numeric_limits<double>::infinity();
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         static_cast<double>(values_.size());
}

double average_ric(const RicWindow& window) { return window.mean(); }

bool prune(const NodeRecord& candidate, const std::vector<const NodeRecord*>& co_located,
           double info_tolerance) {
  for (const NodeRecord* other : co_located) {
    if (other->cost <= candidate.cost &&
        other->info * (1.0 + info_tolerance) >= candidate.info)
      return true;
  }
  return false;
}

InformationFn make_information_fn(const InfoFunctionConfig& config, const GridWorld& world,
                                  const BeliefState& belief) {
  return [config, &world, &belief](const SensedPose& pose, const PoseBelief& pose_belief,
                                   const BeliefOverlayPtr& parent_overlay,
                                   std::optional<double> i_near) {
    return evaluate_information(config, pose, pose_belief, world, belief, parent_overlay, i_near);
  };
}

namespace {

struct Builder {
  const GridWorld& world;
  const InformationFn& information;
  const PlannerConfig& config;
  BeliefState* shared_belief;  // optional shared planning map
  Tree tree;
  SpatialIndex index;  // insertion order == node id; closed nodes deactivated
  // Node ids grouped by co-location cell; a candidate is checked for
  // cost/info domination against the nodes sharing its cell.
  std::unordered_map<long long, std::vector<int>> cell_nodes;
  double cell_size;
  SeededRng rng;

  long long bin_of(const Point2& p) const {
    const long long ix = static_cast<long long>(std::floor(p.x / cell_size));
    const long long iy = static_cast<long long>(std::floor(p.y / cell_size));
    return ix * 2000003LL + iy;
  }

  Builder(const GridWorld& w, const InformationFn& fn, const PlannerConfig& cfg,
          BeliefState* shared)
      : world(w), information(fn), config(cfg), shared_belief(shared),
        cell_size(cfg.prune_cell_size > 0.0 ? cfg.prune_cell_size : w.resolution()),
        rng(cfg.seed) {
    if (!w.free_at(cfg.start))
      throw std::invalid_argument("planner: start position is not in free space");
    NodeRecord root;
    root.id = 0;
    root.position = cfg.start;
    root.cost = 0.0;
    root.parent = -1;
    root.pose_belief.mean << cfg.start.x, cfg.start.y, cfg.start_heading;
    root.pose_belief.covariance = cfg.sigma_init;
    InfoResult init = information({cfg.start, cfg.start_heading}, root.pose_belief, nullptr,
                                  std::nullopt);
    root.info = init.info;
    root.overlay = init.overlay;
    root.closed = root.cost > cfg.budget;
    tree.nodes.push_back(root);
    index.insert(root.position);
    if (root.closed) index.deactivate(0);
    cell_nodes[bin_of(root.position)].push_back(0);
    if (shared_belief) {
      merge_predictions(root.overlay);
      tree.nodes[0].overlay = nullptr;
    }
  }

  void merge_predictions(const BeliefOverlayPtr& overlay) {
    if (!shared_belief || !overlay) return;
    for (const auto& [cell, value] : overlay->local_entries()) {
      shared_belief->set_occupancy(cell, value.occupancy);
      shared_belief->set_variance(cell, value.variance);
    }
  }

  void add(NodeRecord&& node) {
    index.insert(node.position);
    if (node.cost > config.budget) {
      node.closed = true;
      index.deactivate(node.id);
    }
    cell_nodes[bin_of(node.position)].push_back(node.id);
    if (shared_belief) {
      // The shared map already carries every inserted node's predictions, so
      // per-node overlays would only shadow it with stale values (and hold
      // redundant memory); merge and drop them.
      merge_predictions(node.overlay);
      node.overlay = nullptr;
    }
    tree.nodes.push_back(std::move(node));
  }

  /// One Sample/Nearest/Steer/Near expansion round. `on_insert` is called
  /// with each newly inserted node (after insertion).
  template <typename OnInsert>
  bool expand(OnInsert&& on_insert) {
    if (index.active_count() == 0) return false;  // every node closed
    const Point2 sample = sample_uniform(world, rng);
    const int nearest = index.nearest(sample);
    const Point2 feasible = steer(tree.nodes[nearest].position, sample, config.delta);
    std::vector<int> near_ids = index.radius(feasible, config.r_near);
    if (config.near_cap > 0 && static_cast<int>(near_ids.size()) > config.near_cap) {
      // Keep the closest near_cap neighbours (ties by lower id) so the
      // per-sample expansion work stays bounded as the tree densifies.
      std::stable_sort(near_ids.begin(), near_ids.end(), [&](int a, int b) {
        return distance(tree.nodes[a].position, feasible) <
               distance(tree.nodes[b].position, feasible);
      });
      near_ids.resize(config.near_cap);
    }
    for (int near_id : near_ids) {
      // Copy: tree.nodes may reallocate when we insert below.
      const NodeRecord near_node = tree.nodes[near_id];
      const Point2 x_new = steer(near_node.position, feasible, config.delta);
      const double edge = distance(near_node.position, x_new);
      if (edge <= 0.0) continue;  // edge costs must stay strictly positive
      if (!no_collision(near_node.position, x_new, world)) continue;

      const double cost_new = near_node.cost + edge;
      const auto cell_it = cell_nodes.find(bin_of(x_new));
      const std::vector<int>* co_located =
          cell_it == cell_nodes.end() ? nullptr : &cell_it->second;
      if (co_located && std::isfinite(config.max_gain_hint)) {
        // Information can rise by at most max_gain_hint over the parent, so a
        // co-located node that already beats that bound on both axes will
        // dominate the candidate; skip the (expensive) information call.
        const double info_cap = near_node.info + config.max_gain_hint;
        bool dominated = false;
        for (int other_id : *co_located) {
          const NodeRecord& other = tree.nodes[other_id];
          if (other.cost <= cost_new && other.info >= info_cap) {
            dominated = true;
            break;
          }
        }
        if (dominated) continue;
      }

      const double heading =
          std::atan2(x_new.y - near_node.position.y, x_new.x - near_node.position.x);
      NodeRecord candidate;
      candidate.id = static_cast<int>(tree.nodes.size());
      candidate.position = x_new;
      candidate.cost = cost_new;
      candidate.parent = near_id;
      candidate.pose_belief =
          propagate(near_node.pose_belief, near_node.position, x_new, config.noise);
      InfoResult res =
          information({x_new, heading}, candidate.pose_belief,
                      shared_belief ? nullptr : near_node.overlay, near_node.info);
      candidate.info = res.info;
      candidate.overlay = res.overlay;

      if (co_located) {
        std::vector<const NodeRecord*> others;
        others.reserve(co_located->size());
        for (int other_id : *co_located) others.push_back(&tree.nodes[other_id]);
        if (prune(candidate, others, config.prune_info_tolerance)) continue;
      }

      const double near_info = near_node.info;
      add(std::move(candidate));
      on_insert(tree.nodes.back(), near_info);
    }
    return true;
  }
};

}  // namespace

Tree rig_tree(const GridWorld& world, const InformationFn& information,
              const PlannerConfig& config, int sample_budget, BeliefState* shared_belief) {
  Builder builder(world, information, config, shared_belief);
  for (int s = 0; s < sample_budget; ++s) {
    if (!builder.expand([](const NodeRecord&, double) {})) break;
  }
  return std::move(builder.tree);
}

Tree iig_tree(const GridWorld& world, const InformationFn& information,
              const PlannerConfig& config, BeliefState* shared_belief) {
  if (config.delta_ric <= 0.0)
    throw std::invalid_argument("iig_tree: delta_ric must be positive");
  Builder builder(world, information, config, shared_belief);
  RicWindow window(config.n_ric);
  int total_samples = 0;
  int since_insert = 0;  // n_sample in the penalized RIC
  while (average_ric(window) > config.delta_ric && total_samples < config.max_samples) {
    ++total_samples;
    ++since_insert;
    const bool alive = builder.expand([&](const NodeRecord& node, double near_info) {
      // The sample is charged to the first insertion of the round; further
      // insertions from the same sample divide by one.
      const double iric =
          compute_ric(node.info, std::max(near_info, kInfoNearFloor), std::max(since_insert, 1));
      since_insert = 0;
      window.append(iric);
      builder.tree.trace.push_back({total_samples, iric, window.mean()});
    });
    if (!alive) break;
  }
  return std::move(builder.tree);
}

}  // namespace iig
