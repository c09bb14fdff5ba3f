#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace iig {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Occupancy grid workspace. Cell (0,0) spans [origin, origin + resolution).
class GridWorld {
 public:
  GridWorld(int width, int height, double resolution, Point2 origin = {0.0, 0.0});

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Point2& origin() const { return origin_; }
  int cell_count() const { return width_ * height_; }

  bool occupied(int ix, int iy) const { return cells_[index_of(ix, iy)] != 0; }
  bool occupied(int index) const { return cells_[index] != 0; }
  void set_occupied(int ix, int iy, bool value) { cells_[index_of(ix, iy)] = value ? 1 : 0; }

  int index_of(int ix, int iy) const;
  std::pair<int, int> cell_coords(int index) const { return {index % width_, index / width_}; }

  bool contains(const Point2& p) const;
  /// Cell index containing p. Throws if out of bounds.
  int cell_of(const Point2& p) const;
  Point2 cell_center(int index) const;

  bool free_at(const Point2& p) const { return contains(p) && !occupied(cell_of(p)); }
  bool has_free_cell() const;

  double width_m() const { return width_ * resolution_; }
  double height_m() const { return height_ * resolution_; }

  /// Plain-text format: "width height resolution" then height rows of '#'/'.'.
  static GridWorld from_text(const std::string& text);
  static GridWorld load(const std::string& path);
  std::string to_text() const;

 private:
  int width_;
  int height_;
  double resolution_;
  Point2 origin_;
  std::vector<std::uint8_t> cells_;
};

/// Deterministic RNG with explicit double generation so streams are
/// reproducible regardless of the standard library's distribution internals.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// kd-tree over inserted points with lazy deactivation. Results match a
/// brute-force scan; nearest ties break by lowest insertion index.
class SpatialIndex {
 public:
  int insert(const Point2& p);
  void deactivate(int index);
  bool active(int index) const { return active_[index]; }
  int size() const { return static_cast<int>(points_.size()); }
  int active_count() const { return active_count_; }
  const Point2& point(int index) const { return points_[index]; }

  /// Index of the closest active point. Throws if no active points.
  int nearest(const Point2& query) const;
  /// Active points with distance <= r, in insertion order.
  std::vector<int> radius(const Point2& query, double r) const;

 private:
  struct Node {
    int point = -1;
    int left = -1;
    int right = -1;
    int axis = 0;
  };

  int insert_node(int node, int point, int depth);
  void nearest_rec(int node, const Point2& q, int& best, double& best_d2) const;
  void radius_rec(int node, const Point2& q, double r2, std::vector<int>& out) const;

  std::vector<Point2> points_;
  std::vector<bool> active_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int active_count_ = 0;
};

struct RayHit {
  double range = 0.0;
  /// Traversed free cells up to (excluding) the hit cell (the perception set).
  std::vector<int> cells;
  /// Approximate range to each traversed cell (entry distance + half cell).
  std::vector<double> ranges;
  /// Index of the obstacle cell that stopped the ray, -1 if none.
  int hit_cell = -1;
};

/// Uniform sample over free space by rejection over the bounding box.
Point2 sample_uniform(const GridWorld& world, SeededRng& rng);

Point2 steer(const Point2& from, const Point2& toward, double delta);

/// True iff every cell traversed by segment a-b is free. Out-of-bounds
/// endpoints count as collision.
bool no_collision(const Point2& a, const Point2& b, const GridWorld& world);

/// DDA grid traversal along the ray, stopping at the first obstacle or r_max.
RayHit ray_cast(const GridWorld& world, const Point2& origin, double angle, double r_max);

/// Same traversal with a caller-supplied occupancy predicate over cell
/// indices; `world` contributes geometry only. Lets callers ray-cast in a
/// believed map instead of the ground-truth grid.
RayHit ray_cast_custom(const GridWorld& world, const Point2& origin, double angle, double r_max,
                       const std::function<bool(int)>& occupied_cell);

}  // namespace iig
