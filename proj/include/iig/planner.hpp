#pragma once

#include <cstdint>
#include <limits>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "iig/info.hpp"
#include "iig/pose.hpp"

namespace iig {

struct NodeRecord {
  int id = 0;
  Point2 position;
  double cost = 0.0;   // accumulated path length, meters
  double info = 0.0;   // accumulated information, nats
  int parent = -1;     // -1 for the root
  BeliefOverlayPtr overlay;
  PoseBelief pose_belief;
  bool closed = false;
};

/// One row of the IIG convergence trace: total samples drawn so far, the
/// penalized relative information contribution of the inserted node, and
/// the windowed mean at that point.
struct ConvergenceSample {
  int samples = 0;
  double iric = 0.0;
  double mean = 0.0;
};

struct Tree {
  std::vector<NodeRecord> nodes;
  std::vector<ConvergenceSample> trace;  // empty for fixed-budget trees
};

/// Penalized relative information contribution: ((I_new / I_near) - 1) / n.
double compute_ric(double info_new, double info_near, int n_samples);

/// Fixed-capacity window of penalized RIC values. The mean is +infinity
/// until the window has filled once, so convergence cannot fire early.
class RicWindow {
 public:
  explicit RicWindow(int capacity);

  void append(double value);
  double mean() const;
  int size() const { return static_cast<int>(values_.size()); }
  int capacity() const { return capacity_; }

 private:
  int capacity_;
  std::deque<double> values_;
};

double average_ric(const RicWindow& window);

/// True iff some co-located node dominates the candidate: cost <= and
/// info >= (ties on both count as dominated). `info_tolerance` relaxes the
/// information side by a relative margin so near-duplicate nodes along
/// marginally longer paths are also dominated; 0 is the exact rule.
bool prune(const NodeRecord& candidate, const std::vector<const NodeRecord*>& co_located,
           double info_tolerance = 0.0);

struct PlannerConfig {
  Point2 start;
  double start_heading = 0.0;
  double delta = 1.0;       // steer step, meters
  double r_near = 2.0;      // near-neighbourhood radius, meters
  double budget = 30.0;     // path-length budget b, meters
  double delta_ric = 5e-4;  // convergence threshold
  int n_ric = 30;           // RIC window size
  int max_samples = 200000; // hard cap for iig_tree
  std::uint64_t seed = 1;
  double prune_info_tolerance = 0.02;  // relative slack in the domination test
  int near_cap = 8;                    // keep only this many nearest neighbours (0 = all)
  double prune_cell_size = 0.0;        // co-location granularity; 0 = map resolution
  // Upper bound on a single node's information increment, when one is
  // known (e.g. perception-field entropy for MI/MIUB). Lets the builder
  // skip evaluating candidates that cannot beat their bin; infinity
  // disables the shortcut without changing results.
  double max_gain_hint = std::numeric_limits<double>::infinity();
  Eigen::Matrix3d sigma_init = Eigen::Matrix3d::Zero();
  MotionNoise noise;
};

/// Information callback evaluated for each candidate node. Receives the
/// candidate's sensing pose, its propagated pose belief, the parent's
/// belief overlay and accumulated information (absent for the root).
using InformationFn =
    std::function<InfoResult(const SensedPose& pose, const PoseBelief& pose_belief,
                             const BeliefOverlayPtr& parent_overlay, std::optional<double> i_near)>;

/// Bind one of the four built-in estimators over a fixed world and belief.
InformationFn make_information_fn(const InfoFunctionConfig& config, const GridWorld& world,
                                  const BeliefState& belief);

/// RIG-tree: grows for exactly `sample_budget` samples.
///
/// If `shared_belief` is non-null, every inserted node's predicted cell
/// updates are merged into it, so later candidates are evaluated against the
/// already-predicted map and information is not double-counted across
/// branches. Pass the same (scratch) belief the information callback reads.
Tree rig_tree(const GridWorld& world, const InformationFn& information,
              const PlannerConfig& config, int sample_budget,
              BeliefState* shared_belief = nullptr);

/// IIG-tree: grows until the windowed mean of penalized RIC values drops
/// below delta_RIC (or max_samples is hit); records the convergence trace.
/// `shared_belief` behaves as in rig_tree.
Tree iig_tree(const GridWorld& world, const InformationFn& information,
              const PlannerConfig& config, BeliefState* shared_belief = nullptr);

}  // namespace iig
