#include <cmath>
#include <memory>

#include "doctest.h"
#include "iig/belief.hpp"

using namespace iig;

TEST_SUITE("belief") {

TEST_CASE("cell entropy: symmetric, maximal at one half, known value") {
  CHECK(cell_entropy(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(cell_entropy(0.1) == doctest::Approx(cell_entropy(0.9)));
  CHECK(cell_entropy(0.1) < cell_entropy(0.3));
  CHECK(cell_entropy(0.3) < cell_entropy(0.5));
  // -0.1 ln 0.1 - 0.9 ln 0.9
  CHECK(cell_entropy(0.1) ==
        doctest::Approx(-0.1 * std::log(0.1) - 0.9 * std::log(0.9)).epsilon(1e-12));
}

TEST_CASE("inverse model pushes probabilities in the right direction") {
  InverseModelParams params;
  const double up = inverse_update(0.5, CellObservation::Occupied, params);
  const double down = inverse_update(0.5, CellObservation::Free, params);
  CHECK(up > 0.5);
  CHECK(down < 0.5);
  // Repeated updates saturate at the p_sat clamp, never beyond it.
  double p = 0.5;
  for (int i = 0; i < 200; ++i) p = inverse_update(p, CellObservation::Occupied, params);
  CHECK(p == doctest::Approx(1.0 - params.p_sat + params.epsilon));
  p = 0.5;
  for (int i = 0; i < 200; ++i) p = inverse_update(p, CellObservation::Free, params);
  CHECK(p == doctest::Approx(params.p_sat - params.epsilon));
}

TEST_CASE("bcm fusion is the precision sum and always shrinks") {
  CHECK(bcm_fuse(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(bcm_fuse(2.0, 6.0) == doctest::Approx(1.5));
  CHECK(bcm_fuse(0.3, 4.0) < 0.3);
}

TEST_CASE("beam likelihood integrates to one over [0, r_max]") {
  SensorModel model;
  model.validate();
  // All four mixture components are normalized densities on [0, r_max]
  // (the max-range mass is smeared over the last 1/s_z bin), so the
  // trapezoid integral of the mixture must be ~1. The hit Gaussian is
  // narrow (sigma 0.05 m) and the density has jumps at z_hat and at the
  // max-range bin edge, hence the fine grid and loose tolerance.
  for (double z_hat : {0.7, 3.1, 4.9}) {
    const int steps = 400000;
    const double h = model.r_max / steps;
    double integral = 0.0;
    double prev = beam_likelihood(0.0, z_hat, model);
    for (int i = 1; i <= steps; ++i) {
      const double cur = beam_likelihood(i * h, z_hat, model);
      integral += 0.5 * (prev + cur) * h;
      prev = cur;
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(2e-2));
  }
}

TEST_CASE("beam likelihood peaks at the predicted range") {
  SensorModel model;
  const double z_hat = 2.5;
  const double at_hat = beam_likelihood(z_hat, z_hat, model);
  CHECK(at_hat > beam_likelihood(z_hat - 0.2, z_hat, model));
  CHECK(at_hat > beam_likelihood(z_hat + 0.2, z_hat, model));
  CHECK_THROWS(beam_likelihood(-0.1, z_hat, model));
  CHECK_THROWS(beam_likelihood(model.r_max + 0.1, z_hat, model));
}

TEST_CASE("belief state from world maps truth to p_occ and p_free") {
  GridWorld w(3, 2, 1.0);
  w.set_occupied(1, 0, true);
  const BeliefState b = BeliefState::from_world(w, 0.65, 0.35);
  CHECK(b.occupancy(w.index_of(1, 0)) == doctest::Approx(0.65));
  CHECK(b.occupancy(w.index_of(0, 0)) == doctest::Approx(0.35));
}

TEST_CASE("overlays shadow the base and chain through parents") {
  BeliefState base(4, 4, 0.5, 1.0);
  auto parent = std::make_shared<BeliefOverlay>();
  parent->set(3, {0.9, 0.2});
  auto child = std::make_shared<BeliefOverlay>(BeliefOverlayPtr(parent));
  child->set(5, {0.1, 0.7});

  CHECK(child->occupancy(3, base) == doctest::Approx(0.9));  // from the parent
  CHECK(child->occupancy(5, base) == doctest::Approx(0.1));  // local
  CHECK(child->occupancy(7, base) == doctest::Approx(0.5));  // base fallthrough
  CHECK(child->variance(3, base) == doctest::Approx(0.2));
  CHECK(child->variance(7, base) == doctest::Approx(1.0));

  // A child's shadowing entry wins over the parent's.
  auto grandchild = std::make_shared<BeliefOverlay>(BeliefOverlayPtr(child));
  grandchild->set(3, {0.2, 0.4});
  CHECK(grandchild->occupancy(3, base) == doctest::Approx(0.2));
  CHECK(child->occupancy(3, base) == doctest::Approx(0.9));  // parent untouched
}

TEST_CASE("deep overlay chains keep lookups correct (flattening audit)") {
  BeliefState base(8, 8, 0.5, 1.0);
  BeliefOverlayPtr chain = std::make_shared<BeliefOverlay>();
  for (int depth = 0; depth < 64; ++depth) {
    auto next = std::make_shared<BeliefOverlay>(chain);
    next->set(depth, {0.7, 0.3});
    chain = next;
  }
  for (int cell = 0; cell < 64; ++cell) CHECK(chain->occupancy(cell, base) == doctest::Approx(0.7));
}

TEST_CASE("average map entropy respects overlays") {
  BeliefState base(2, 2, 0.5, 1.0);
  CHECK(average_map_entropy(base) == doctest::Approx(std::log(2.0)));
  BeliefOverlay overlay;
  overlay.set(0, {0.0001, 1.0});
  const double expected = (cell_entropy(0.0001) + 3.0 * std::log(2.0)) / 4.0;
  CHECK(average_map_entropy(base, &overlay) == doctest::Approx(expected));
}

}  // TEST_SUITE
