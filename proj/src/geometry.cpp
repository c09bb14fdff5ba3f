#include "iig/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace iig {

GridWorld::GridWorld(int width, int height, double resolution, Point2 origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin),
      cells_(static_cast<std::size_t>(width) * height, 0) {
  if (width < 1 || height < 1) throw std::invalid_argument("GridWorld: dimensions must be >= 1");
  if (resolution <= 0.0) throw std::invalid_argument("GridWorld: resolution must be > 0");
}

int GridWorld::index_of(int ix, int iy) const {
  if (ix < 0 || ix >= width_ || iy < 0 || iy >= height_)
    throw std::out_of_range("GridWorld: cell out of bounds");
  return iy * width_ + ix;
}

bool GridWorld::contains(const Point2& p) const {
  return p.x >= origin_.x && p.y >= origin_.y && p.x < origin_.x + width_m() &&
         p.y < origin_.y + height_m();
}

int GridWorld::cell_of(const Point2& p) const {
  if (!contains(p)) throw std::out_of_range("GridWorld: point out of bounds");
  int ix = static_cast<int>((p.x - origin_.x) / resolution_);
  int iy = static_cast<int>((p.y - origin_.y) / resolution_);
  ix = std::min(ix, width_ - 1);
  iy = std::min(iy, height_ - 1);
  return iy * width_ + ix;
}

Point2 GridWorld::cell_center(int index) const {
  const auto [ix, iy] = cell_coords(index);
  return {origin_.x + (ix + 0.5) * resolution_, origin_.y + (iy + 0.5) * resolution_};
}

bool GridWorld::has_free_cell() const {
  return std::any_of(cells_.begin(), cells_.end(), [](std::uint8_t c) { return c == 0; });
}

GridWorld GridWorld::from_text(const std::string& text) {
  std::istringstream in(text);
  int width = 0, height = 0;
  double resolution = 0.0;
  if (!(in >> width >> height >> resolution))
    throw std::runtime_error("GridWorld: malformed header line");
  GridWorld world(width, height, resolution);
  std::string line;
  std::getline(in, line);  // rest of header line
  for (int row = 0; row < height; ++row) {
    if (!std::getline(in, line) || static_cast<int>(line.size()) < width)
      throw std::runtime_error("GridWorld: truncated map row " + std::to_string(row));
    // First text row is the top of the map (highest y index).
    const int iy = height - 1 - row;
    for (int ix = 0; ix < width; ++ix) {
      const char c = line[ix];
      if (c != '#' && c != '.')
        throw std::runtime_error("GridWorld: unexpected map character");
      world.set_occupied(ix, iy, c == '#');
    }
  }
  return world;
}

GridWorld GridWorld::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("GridWorld: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::string GridWorld::to_text() const {
  std::ostringstream out;
  out << width_ << ' ' << height_ << ' ' << resolution_ << '\n';
  for (int row = 0; row < height_; ++row) {
    const int iy = height_ - 1 - row;
    for (int ix = 0; ix < width_; ++ix) out << (occupied(ix, iy) ? '#' : '.');
    out << '\n';
  }
  return out.str();
}

double SeededRng::uniform() {
  // 53 random bits -> [0, 1)
  return (engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  spare_ = mag * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return mag * std::cos(2.0 * M_PI * u2);
}

int SpatialIndex::insert(const Point2& p) {
  const int point = static_cast<int>(points_.size());
  points_.push_back(p);
  active_.push_back(true);
  ++active_count_;
  Node node;
  node.point = point;
  nodes_.push_back(node);
  if (root_ == -1) {
    root_ = point;
    nodes_[point].axis = 0;
  } else {
    insert_node(root_, point, 0);
  }
  return point;
}

int SpatialIndex::insert_node(int node, int point, int depth) {
  const int axis = depth % 2;
  const Point2& np = points_[nodes_[node].point];
  const Point2& pp = points_[point];
  const double nv = axis == 0 ? np.x : np.y;
  const double pv = axis == 0 ? pp.x : pp.y;
  int& child = pv < nv ? nodes_[node].left : nodes_[node].right;
  if (child == -1) {
    child = point;
    nodes_[point].axis = (depth + 1) % 2;
    return point;
  }
  return insert_node(child, point, depth + 1);
}

void SpatialIndex::deactivate(int index) {
  if (active_[index]) {
    active_[index] = false;
    --active_count_;
  }
}

int SpatialIndex::nearest(const Point2& query) const {
  if (active_count_ == 0) throw std::runtime_error("SpatialIndex: no active points");
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  nearest_rec(root_, query, best, best_d2);
  return best;
}

void SpatialIndex::nearest_rec(int node, const Point2& q, int& best, double& best_d2) const {
  if (node == -1) return;
  const Node& n = nodes_[node];
  const int pi = n.point;
  if (active_[pi]) {
    const double d2 = squared_distance(points_[pi], q);
    if (d2 < best_d2 || (d2 == best_d2 && pi < best)) {
      best_d2 = d2;
      best = pi;
    }
  }
  const Point2& np = points_[pi];
  const double diff = n.axis == 0 ? q.x - np.x : q.y - np.y;
  const int first = diff < 0.0 ? n.left : n.right;
  const int second = diff < 0.0 ? n.right : n.left;
  nearest_rec(first, q, best, best_d2);
  // Strict comparison so equal-distance candidates across the split are visited.
  if (diff * diff <= best_d2) nearest_rec(second, q, best, best_d2);
}

std::vector<int> SpatialIndex::radius(const Point2& query, double r) const {
  if (r <= 0.0) throw std::invalid_argument("SpatialIndex: radius must be > 0");
  std::vector<int> out;
  radius_rec(root_, query, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void SpatialIndex::radius_rec(int node, const Point2& q, double r2, std::vector<int>& out) const {
  if (node == -1) return;
  const Node& n = nodes_[node];
  const int pi = n.point;
  if (active_[pi] && squared_distance(points_[pi], q) <= r2) out.push_back(pi);
  const Point2& np = points_[pi];
  const double diff = n.axis == 0 ? q.x - np.x : q.y - np.y;
  const int first = diff < 0.0 ? n.left : n.right;
  const int second = diff < 0.0 ? n.right : n.left;
  radius_rec(first, q, r2, out);
  if (diff * diff <= r2) radius_rec(second, q, r2, out);
}

Point2 sample_uniform(const GridWorld& world, SeededRng& rng) {
  if (!world.has_free_cell()) throw std::runtime_error("sample_uniform: no free cell in world");
  const Point2& o = world.origin();
  for (;;) {
    Point2 p{rng.uniform(o.x, o.x + world.width_m()), rng.uniform(o.y, o.y + world.height_m())};
    if (world.free_at(p)) return p;
  }
}

Point2 steer(const Point2& from, const Point2& toward, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("steer: delta must be > 0");
  const double d = distance(from, toward);
  if (d <= delta) return toward;
  if (d == 0.0) return from;
  const double s = delta / d;
  return {from.x + s * (toward.x - from.x), from.y + s * (toward.y - from.y)};
}

namespace {

// Visits the cells traversed by the segment/ray via DDA voxel walking.
// Returns false from the callback to stop.
template <typename Fn>
void walk_cells(const GridWorld& world, const Point2& start, double dx, double dy,
                double max_len, Fn&& visit) {
  const double res = world.resolution();
  const Point2& o = world.origin();
  int ix = static_cast<int>((start.x - o.x) / res);
  int iy = static_cast<int>((start.y - o.y) / res);
  ix = std::clamp(ix, 0, world.width() - 1);
  iy = std::clamp(iy, 0, world.height() - 1);

  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  const double inv_dx = dx != 0.0 ? 1.0 / dx : 0.0;
  const double inv_dy = dy != 0.0 ? 1.0 / dy : 0.0;

  auto boundary_x = [&](int i) { return o.x + (dx > 0.0 ? (i + 1) : i) * res; };
  auto boundary_y = [&](int i) { return o.y + (dy > 0.0 ? (i + 1) : i) * res; };

  double t_max_x = step_x != 0 ? (boundary_x(ix) - start.x) * inv_dx
                               : std::numeric_limits<double>::infinity();
  double t_max_y = step_y != 0 ? (boundary_y(iy) - start.y) * inv_dy
                               : std::numeric_limits<double>::infinity();
  const double t_delta_x =
      step_x != 0 ? res * std::abs(inv_dx) : std::numeric_limits<double>::infinity();
  const double t_delta_y =
      step_y != 0 ? res * std::abs(inv_dy) : std::numeric_limits<double>::infinity();

  double t = 0.0;
  for (;;) {
    if (!visit(ix, iy, t)) return;
    const double t_next = std::min(t_max_x, t_max_y);
    if (t_next > max_len) return;
    if (t_max_x < t_max_y) {
      ix += step_x;
      t = t_max_x;
      t_max_x += t_delta_x;
    } else {
      iy += step_y;
      t = t_max_y;
      t_max_y += t_delta_y;
    }
    if (ix < 0 || ix >= world.width() || iy < 0 || iy >= world.height()) return;
  }
}

}  // namespace

bool no_collision(const Point2& a, const Point2& b, const GridWorld& world) {
  if (!world.contains(a) || !world.contains(b)) return false;
  const double len = distance(a, b);
  if (len == 0.0) return !world.occupied(world.cell_of(a));
  bool clear = true;
  walk_cells(world, a, b.x - a.x, b.y - a.y, 1.0, [&](int ix, int iy, double) {
    if (world.occupied(ix, iy)) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

RayHit ray_cast(const GridWorld& world, const Point2& origin, double angle, double r_max) {
  return ray_cast_custom(world, origin, angle, r_max,
                         [&](int cell) { return world.occupied(cell); });
}

RayHit ray_cast_custom(const GridWorld& world, const Point2& origin, double angle, double r_max,
                       const std::function<bool(int)>& occupied_cell) {
  if (r_max <= 0.0) throw std::invalid_argument("ray_cast: r_max must be > 0");
  if (!world.contains(origin) || occupied_cell(world.cell_of(origin)))
    throw std::runtime_error("ray_cast: origin not in free space");
  RayHit hit;
  hit.range = r_max;
  const double half_cell = 0.5 * world.resolution();
  walk_cells(world, origin, std::cos(angle), std::sin(angle), r_max, [&](int ix, int iy, double t) {
    const int cell = iy * world.width() + ix;
    if (occupied_cell(cell)) {
      hit.range = t;
      hit.hit_cell = cell;
      return false;
    }
    hit.cells.push_back(cell);
    hit.ranges.push_back(std::min(t + half_cell, r_max));
    return true;
  });
  return hit;
}

}  // namespace iig
