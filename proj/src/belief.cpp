#include "iig/belief.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace iig {

void SensorModel::validate() const {
  if (beam_count < 1) throw std::invalid_argument("SensorModel: beam_count must be >= 1");
  if (r_max <= 0.0) throw std::invalid_argument("SensorModel: r_max must be > 0");
  if (z_hit < 0.0 || z_short < 0.0 || z_max < 0.0 || z_rand < 0.0)
    throw std::invalid_argument("SensorModel: weights must be nonnegative");
  if (std::abs(z_hit + z_short + z_max + z_rand - 1.0) > 1e-9)
    throw std::invalid_argument("SensorModel: weights must sum to 1");
  if (sigma_hit <= 0.0 || lambda_short <= 0.0 || integration_resolution <= 0.0)
    throw std::invalid_argument("SensorModel: sigma_hit, lambda_short, s_z must be > 0");
}

std::vector<double> SensorModel::beam_angles(double heading) const {
  std::vector<double> angles(beam_count);
  for (int i = 0; i < beam_count; ++i)
    angles[i] = heading + 2.0 * M_PI * i / beam_count;
  return angles;
}

void InverseModelParams::validate() const {
  if (!(p_sat > 0.0 && p_sat < 0.5))
    throw std::invalid_argument("InverseModelParams: p_sat must be in (0, 0.5)");
  if (!(b_free > 0.0 && b_free < 1.0 && b_occ > 1.0))
    throw std::invalid_argument("InverseModelParams: need 0 < b_free < 1 < b_occ");
  if (!(epsilon > 0.0 && epsilon < p_sat))
    throw std::invalid_argument("InverseModelParams: need 0 < epsilon < p_sat");
}

BeliefState::BeliefState(int width, int height, double initial_probability,
                         double initial_variance)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw std::invalid_argument("BeliefState: dimensions must be >= 1");
  if (initial_variance < 0.0)
    throw std::invalid_argument("BeliefState: variance must be >= 0");
  const double p =
      std::clamp(initial_probability, kProbabilityClamp, 1.0 - kProbabilityClamp);
  occupancy_.assign(static_cast<std::size_t>(width) * height, p);
  variance_.assign(static_cast<std::size_t>(width) * height, initial_variance);
}

BeliefState BeliefState::from_world(const GridWorld& world, double p_occ, double p_free,
                                    double initial_variance) {
  BeliefState belief(world.width(), world.height(), 0.5, initial_variance);
  for (int i = 0; i < world.cell_count(); ++i)
    belief.set_occupancy(i, world.occupied(i) ? p_occ : p_free);
  return belief;
}

void BeliefState::set_occupancy(int cell, double p) {
  occupancy_[cell] = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

void BeliefState::set_variance(int cell, double v) {
  variance_[cell] = std::max(0.0, v);
}

std::string BeliefState::occupancy_csv() const {
  std::ostringstream out;
  char buf[32];
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) {
      std::snprintf(buf, sizeof(buf), "%.17g", occupancy_[iy * width_ + ix]);
      out << buf << (ix + 1 == width_ ? '\n' : ',');
    }
  }
  return out.str();
}

namespace {
constexpr int kMaxOverlayDepth = 12;
}

BeliefOverlay::BeliefOverlay(BeliefOverlayPtr parent) : parent_(std::move(parent)) {
  if (!parent_) return;
  depth_ = parent_->depth_ + 1;
  if (depth_ < kMaxOverlayDepth) return;
  // Collect the chain and merge oldest-first so newer entries win.
  std::vector<const BeliefOverlay*> chain;
  for (const BeliefOverlay* o = parent_.get(); o != nullptr; o = o->parent_.get())
    chain.push_back(o);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    for (const auto& [cell, value] : (*it)->entries_) entries_[cell] = value;
  parent_ = nullptr;
  depth_ = 0;
}

const CellBelief* BeliefOverlay::find(int cell) const {
  for (const BeliefOverlay* layer = this; layer != nullptr; layer = layer->parent_.get()) {
    auto it = layer->entries_.find(cell);
    if (it != layer->entries_.end()) return &it->second;
  }
  return nullptr;
}

double BeliefOverlay::occupancy(int cell, const BeliefState& base) const {
  const CellBelief* entry = find(cell);
  return entry != nullptr ? entry->occupancy : base.occupancy(cell);
}

double BeliefOverlay::variance(int cell, const BeliefState& base) const {
  const CellBelief* entry = find(cell);
  return entry != nullptr ? entry->variance : base.variance(cell);
}

double cell_entropy(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("cell_entropy: p must be in (0, 1)");
  return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
}

double average_map_entropy(const BeliefState& belief, const BeliefOverlay* overlay) {
  const int n = belief.cell_count();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = overlay != nullptr ? overlay->occupancy(i, belief) : belief.occupancy(i);
    sum += cell_entropy(p);
  }
  return sum / n;
}

double beam_likelihood(double z, double z_hat, const SensorModel& model) {
  if (z < 0.0 || z > model.r_max)
    throw std::invalid_argument("beam_likelihood: z outside [0, r_max]");
  const double sigma = model.sigma_hit;

  // Gaussian hit component normalized on [0, r_max].
  const double hit_norm =
      0.5 * (std::erf((model.r_max - z_hat) / (sigma * std::sqrt(2.0))) -
             std::erf((0.0 - z_hat) / (sigma * std::sqrt(2.0))));
  double p_hit = 0.0;
  if (hit_norm > 0.0) {
    const double u = (z - z_hat) / sigma;
    p_hit = std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * M_PI)) / hit_norm;
  }

  // Truncated exponential on [0, z_hat].
  double p_short = 0.0;
  if (z <= z_hat && z_hat > 0.0) {
    const double short_norm = 1.0 - std::exp(-model.lambda_short * z_hat);
    if (short_norm > 0.0)
      p_short = model.lambda_short * std::exp(-model.lambda_short * z) / short_norm;
  }

  // Max-range point mass smeared over the last integration bin.
  const double bin = 1.0 / model.integration_resolution;
  const double p_max = z >= model.r_max - bin ? 1.0 / bin : 0.0;

  const double p_rand = 1.0 / model.r_max;

  return model.z_hit * p_hit + model.z_short * p_short + model.z_max * p_max +
         model.z_rand * p_rand;
}

double inverse_update(double m, CellObservation observation, const InverseModelParams& params) {
  if (observation == CellObservation::Free)
    return std::max(params.p_sat - params.epsilon, params.b_free * m);
  return std::min(1.0 - params.p_sat + params.epsilon, params.b_occ * m);
}

double bcm_fuse(double sigma_a, double sigma_b) {
  if (sigma_a <= 0.0 || sigma_b <= 0.0)
    throw std::invalid_argument("bcm_fuse: variances must be > 0");
  return 1.0 / (1.0 / sigma_a + 1.0 / sigma_b);
}

}  // namespace iig
