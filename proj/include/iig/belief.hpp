#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "iig/geometry.hpp"

namespace iig {

/// Global clamp keeping occupancy probabilities away from {0, 1}.
constexpr double kProbabilityClamp = 1e-4;

struct SensorModel {
  int beam_count = 10;
  double r_max = 5.0;
  double z_hit = 0.7;
  double z_short = 0.1;
  double z_max = 0.1;
  double z_rand = 0.1;
  double sigma_hit = 0.05;     // m
  double lambda_short = 0.2;   // 1/m
  double integration_resolution = 2.0;  // s_z, 1/m

  void validate() const;
  /// Evenly spaced beam headings over [0, 2*pi).
  std::vector<double> beam_angles(double heading) const;
};

struct InverseModelParams {
  double b_free = 0.6;
  double b_occ = 1.66;
  double p_sat = 0.05;
  double epsilon = 0.0005;  // clamp slack, small relative to p_sat

  void validate() const;
};

/// Occupancy-probability grid plus per-cell variance grid.
class BeliefState {
 public:
  BeliefState(int width, int height, double initial_probability = 0.5,
              double initial_variance = 1.0);
  /// Geometry taken from the world; ground-truth cells map to p_occ/p_free.
  static BeliefState from_world(const GridWorld& world, double p_occ, double p_free,
                                double initial_variance = 1.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int cell_count() const { return static_cast<int>(occupancy_.size()); }

  double occupancy(int cell) const { return occupancy_[cell]; }
  double variance(int cell) const { return variance_[cell]; }
  void set_occupancy(int cell, double p);
  void set_variance(int cell, double v);

  const std::vector<double>& occupancy_grid() const { return occupancy_; }
  const std::vector<double>& variance_grid() const { return variance_; }

  /// Row-major probabilities, one row per grid row.
  std::string occupancy_csv() const;

 private:
  int width_;
  int height_;
  std::vector<double> occupancy_;
  std::vector<double> variance_;
};

struct CellBelief {
  double occupancy;
  double variance;
};

/// Sparse overlay of predicted cell beliefs chained over a base BeliefState.
/// Overlays are immutable once shared; children extend them without copying.
class BeliefOverlay;
using BeliefOverlayPtr = std::shared_ptr<const BeliefOverlay>;

class BeliefOverlay {
 public:
  BeliefOverlay() = default;
  /// Long parent chains are flattened into the new overlay so lookups stay
  /// O(1) amortized as planner paths deepen.
  explicit BeliefOverlay(BeliefOverlayPtr parent);

  void set(int cell, CellBelief value) { entries_[cell] = value; }
  /// Entry from this overlay or the parent chain, if any.
  const CellBelief* find(int cell) const;

  double occupancy(int cell, const BeliefState& base) const;
  double variance(int cell, const BeliefState& base) const;

  std::size_t local_size() const { return entries_.size(); }
  /// Entries held by this overlay itself (excluding the parent chain).
  const std::unordered_map<int, CellBelief>& local_entries() const { return entries_; }

 private:
  std::unordered_map<int, CellBelief> entries_;
  BeliefOverlayPtr parent_;
  int depth_ = 0;
};

/// Bernoulli entropy in nats; domain (0, 1).
double cell_entropy(double p);

/// Mean cell entropy, with an optional overlay applied on top of the base.
double average_map_entropy(const BeliefState& belief, const BeliefOverlay* overlay = nullptr);

/// Beam-based mixture density on [0, r_max]: Gaussian hit, truncated
/// exponential short, max-range bin, uniform random.
double beam_likelihood(double z, double z_hat, const SensorModel& model);

enum class CellObservation { Free, Occupied };

double inverse_update(double m, CellObservation observation, const InverseModelParams& params);

/// BCM precision-sum fusion of two variances.
double bcm_fuse(double sigma_a, double sigma_b);

}  // namespace iig
