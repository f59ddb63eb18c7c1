#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mft/chain.hpp"
#include "mft/rng.hpp"
#include "mft/synth.hpp"
#include "test_support.hpp"

using namespace mft;
using mft::testing::MapProvider;
using mft::testing::constant_bundle;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("delta_schedule hand cases") {
  CHECK(delta_schedule(10, 5) == std::vector<int>{1, 2, 4, 8, 9});
  CHECK(delta_schedule(2, 5) == std::vector<int>{1});
  CHECK(delta_schedule(5, 5) == std::vector<int>{1, 2, 4});
  CHECK(delta_schedule(9, 5) == std::vector<int>{1, 2, 4, 8});
  CHECK(delta_schedule(3, 5) == std::vector<int>{1, 2});
  CHECK(delta_schedule(10, 1) == std::vector<int>{9});
  CHECK(delta_schedule(10, 2) == std::vector<int>{1, 9});
  CHECK_THROWS_AS(delta_schedule(1, 5), Error);
  CHECK_THROWS_AS(delta_schedule(4, 0), Error);
}

TEST_CASE("delta_schedule structure holds for all small frames") {
  for (int k = 1; k <= 5; ++k) {
    for (int j = 2; j <= 64; ++j) {
      const std::vector<int> deltas = delta_schedule(j, k);
      REQUIRE(!deltas.empty());
      CHECK(static_cast<int>(deltas.size()) <= k);
      CHECK(deltas.back() == j - 1);
      if (k >= 2 && j >= 2) CHECK(deltas.front() == 1);
      for (std::size_t i = 1; i < deltas.size(); ++i) {
        CHECK(deltas[i - 1] < deltas[i]);  // strictly ascending
      }
      // Every non-final delta keeps the intermediate frame past frame 1.
      for (std::size_t i = 0; i + 1 < deltas.size(); ++i) {
        CHECK(j - deltas[i] > 1);
      }
    }
  }
}

TEST_CASE("chaining operators") {
  CHECK(chain_variance(1.0, 2.0) == 3.0);
  CHECK(chain_variance(0.0, 0.0) == 0.0);
  CHECK(chain_variance(0.0, 1000.0) == 1000.0);
  CHECK(chain_occlusion(0.1, 0.3) == 0.3);
  CHECK(chain_occlusion(0.0, 0.0) == 0.0);
  CHECK(chain_occlusion(0.95, 0.2) == 0.95);
}

TEST_CASE("score_candidate") {
  CHECK(score_candidate(3.0, 0.01, 0.02, false) == -3.0);
  CHECK(score_candidate(3.0, 0.5, 0.02, false) == -kInf);
  CHECK(score_candidate(0.0, 0.0, 0.7, false) == 0.0);
  CHECK(score_candidate(0.0, 0.0, 0.0, true) == -kInf);
  // Exactly at the threshold does not disqualify.
  CHECK(score_candidate(1.0, 0.02, 0.02, false) == -1.0);
}

TEST_CASE("extending a chain never improves its score or clears occlusion") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const double variance = rng.next_uniform(0.0, 10.0);
    const double occlusion = rng.next_unit();
    const double step_variance = rng.next_uniform(0.0, 5.0);
    const double step_occlusion = rng.next_unit();
    const double theta = rng.next_unit();
    CHECK(score_candidate(chain_variance(variance, step_variance),
                          chain_occlusion(occlusion, step_occlusion), theta, false) <=
          score_candidate(variance, occlusion, theta, false));
    CHECK(chain_occlusion(occlusion, step_occlusion) >= occlusion);
  }
}

TEST_CASE("candidate selection prefers score, then longer jumps") {
  CandidateScore low_var{8, 2, 2.0, 0.0, false, -2.0, {}};
  CandidateScore high_var{6, 4, 5.0, 0.0, false, -5.0, {}};
  CHECK(candidate_preferred(low_var, high_var));
  CHECK_FALSE(candidate_preferred(high_var, low_var));

  CandidateScore tie_short{9, 1, 3.0, 0.0, false, -3.0, {}};
  CandidateScore tie_long{2, 8, 3.0, 0.0, false, -3.0, {}};
  CHECK(candidate_preferred(tie_long, tie_short));
  CHECK_FALSE(candidate_preferred(tie_short, tie_long));

  // All disqualified: minimal occlusion wins, then minimal variance.
  CandidateScore occ_light{9, 1, 7.0, 0.4, false, -kInf, {}};
  CandidateScore occ_heavy{8, 2, 1.0, 0.9, false, -kInf, {}};
  CHECK(candidate_preferred(occ_light, occ_heavy));
  CandidateScore occ_tie_a{9, 1, 7.0, 0.4, false, -kInf, {}};
  CandidateScore occ_tie_b{8, 2, 9.0, 0.4, false, -kInf, {}};
  CHECK(candidate_preferred(occ_tie_a, occ_tie_b));
}

TEST_CASE("single-candidate update composes the provider bundle directly") {
  const ImageExtent extent{4, 3};
  MapProvider provider(extent, 2);
  provider.put(1, 2, constant_bundle(extent, 0.5f, 0.25f, 1.5f, 0.01f));

  ChainConfig config;
  config.occlusion_threshold = 0.02;
  const std::vector<ChainState> states = track(2, provider, config);
  REQUIRE(states.size() == 2);
  const ChainState& s = states[1];
  std::size_t i = 0;
  for (int row = 0; row < extent.height; ++row) {
    for (int col = 0; col < extent.width; ++col, ++i) {
      CHECK(s.x[i] == doctest::Approx(col + 0.5));
      CHECK(s.y[i] == doctest::Approx(row + 0.25));
      CHECK(s.variance[i] == 1.5);
      CHECK(s.occlusion[i] == doctest::Approx(0.01));
    }
  }
}

TEST_CASE("two candidates: lower chained variance wins") {
  const ImageExtent extent{1, 1};
  MapProvider provider(extent, 3);
  provider.put(1, 2, constant_bundle(extent, 0.0f, 0.0f, 2.0f, 0.0f));
  provider.put(2, 3, constant_bundle(extent, 0.0f, 0.0f, 3.0f, 0.0f));  // chained: 5.0
  provider.put(1, 3, constant_bundle(extent, 0.0f, 0.0f, 2.0f, 0.0f));  // direct: 2.0

  ChainConfig config;
  const std::vector<ChainState> states = track(3, provider, config);
  CHECK(states[2].variance[0] == 2.0);
}

TEST_CASE("occluded candidate is disqualified even with lower variance") {
  const ImageExtent extent{1, 1};
  MapProvider provider(extent, 3);
  provider.put(1, 2, constant_bundle(extent, 0.0f, 0.0f, 2.0f, 0.0f));
  provider.put(2, 3, constant_bundle(extent, 0.0f, 0.0f, 0.0f, 0.5f));  // chained var 2, occluded
  provider.put(1, 3, constant_bundle(extent, 0.0f, 0.0f, 5.0f, 0.0f));  // clean, var 5

  ChainConfig config;
  config.occlusion_threshold = 0.02;
  const std::vector<ChainState> states = track(3, provider, config);
  CHECK(states[2].variance[0] == 5.0);
  CHECK(states[2].occlusion[0] == 0.0);
}

TEST_CASE("all-occluded fallback keeps the least-occluded candidate") {
  const ImageExtent extent{8, 1};
  MapProvider provider(extent, 3);
  provider.put(1, 2, constant_bundle(extent, 1.0f, 0.0f, 2.0f, 0.0f));
  provider.put(2, 3, constant_bundle(extent, 1.0f, 0.0f, 1.0f, 0.4f));
  provider.put(1, 3, constant_bundle(extent, 3.0f, 0.0f, 1.0f, 0.9f));

  ChainConfig config;
  config.occlusion_threshold = 0.02;
  const std::vector<ChainState> states = track(3, provider, config);
  // Chain via frame 2 carries occlusion 0.4 < 0.9; its position advances.
  CHECK(states[2].occlusion[0] == doctest::Approx(0.4));
  CHECK(states[2].variance[0] == 3.0);
  CHECK(states[2].x[0] == doctest::Approx(2.0));
}

TEST_CASE("a candidate whose source position left the image is disqualified") {
  const ImageExtent extent{3, 3};
  MapProvider provider(extent, 3);
  provider.put(1, 2, constant_bundle(extent, 10.0f, 0.0f, 0.5f, 0.0f));
  provider.put(2, 3, constant_bundle(extent, 1.0f, 0.0f, 0.1f, 0.0f));
  provider.put(1, 3, constant_bundle(extent, 20.0f, 0.0f, 5.0f, 0.0f));

  ChainConfig config;
  const std::vector<ChainState> states = track(3, provider, config);
  // Frame-2 positions sit outside the image, so the (2, 3) step cannot be
  // sampled; the direct candidate from frame 1 wins despite higher variance.
  CHECK(states[2].variance[0] == 5.0);
  CHECK(states[2].x[0] == doctest::Approx(20.0));
}

TEST_CASE("a pixel with every candidate out of bounds is marked occluded") {
  const ImageExtent extent{3, 3};
  MapProvider provider(extent, 3);
  provider.put(1, 2, constant_bundle(extent, 10.0f, 0.0f, 0.5f, 0.0f));
  provider.put(2, 3, constant_bundle(extent, 1.0f, 0.0f, 0.1f, 0.0f));

  ChainConfig config;
  config.schedule = ScheduleMode::ConsecutiveOnly;  // no frame-1 escape hatch
  const std::vector<ChainState> states = track(3, provider, config);
  for (std::size_t i = 0; i < extent.pixel_count(); ++i) {
    CHECK(states[2].occlusion[i] == 1.0);
    CHECK(std::isinf(states[2].variance[i]));
    CHECK(states[2].x[i] == states[1].x[i]);  // position kept, not advanced
  }
}

TEST_CASE("track is strictly causal") {
  const ImageExtent extent{4, 4};
  MapProvider provider(extent, 4);
  provider.put(1, 2, constant_bundle(extent, 0.25f, 0.0f, 1.0f, 0.0f));
  provider.put(2, 3, constant_bundle(extent, 0.25f, 0.0f, 1.0f, 0.0f));
  provider.put(1, 3, constant_bundle(extent, 0.5f, 0.0f, 1.5f, 0.0f));
  provider.put(3, 4, constant_bundle(extent, 0.25f, 0.0f, 1.0f, 0.0f));
  provider.put(2, 4, constant_bundle(extent, 0.5f, 0.0f, 1.0f, 0.0f));
  provider.put(1, 4, constant_bundle(extent, 0.75f, 0.0f, 9.0f, 0.0f));

  MapProvider mutated(extent, 4);
  mutated.put(1, 2, constant_bundle(extent, 0.25f, 0.0f, 1.0f, 0.0f));
  mutated.put(2, 3, constant_bundle(extent, 0.25f, 0.0f, 1.0f, 0.0f));
  mutated.put(1, 3, constant_bundle(extent, 0.5f, 0.0f, 1.5f, 0.0f));
  // Frames beyond 3 differ wildly.
  mutated.put(3, 4, constant_bundle(extent, -2.0f, 1.0f, 0.1f, 0.9f));
  mutated.put(2, 4, constant_bundle(extent, 2.0f, -1.0f, 0.2f, 0.0f));
  mutated.put(1, 4, constant_bundle(extent, 0.0f, 0.0f, 0.0f, 0.0f));

  ChainConfig config;
  const std::vector<ChainState> full = track(4, provider, config);
  const std::vector<ChainState> other = track(4, mutated, config);
  for (int frame = 0; frame < 3; ++frame) {
    CHECK(full[frame].x == other[frame].x);
    CHECK(full[frame].y == other[frame].y);
    CHECK(full[frame].variance == other[frame].variance);
    CHECK(full[frame].occlusion == other[frame].occlusion);
  }
}

TEST_CASE("update_frame reports missing states and propagates provider errors") {
  const ImageExtent extent{2, 2};
  MapProvider provider(extent, 3);
  const ChainConfig config;
  std::vector<ChainState> only_first{identity_state(extent)};
  CHECK_THROWS_AS(update_frame(only_first, 3, provider, config), Error);

  provider.put(1, 2, constant_bundle(extent, 0.0f, 0.0f, 0.0f, 0.0f));
  std::vector<ChainState> states = track(2, provider, config);
  // Pair (1..2, 3) missing from the provider.
  CHECK_THROWS_AS(update_frame(states, 3, provider, config), Error);
}

TEST_CASE("schedule modes reduce to direct and consecutive candidate sets") {
  const ImageExtent extent{2, 2};
  MapProvider provider(extent, 3);
  provider.put(1, 2, constant_bundle(extent, 0.5f, 0.0f, 1.0f, 0.0f));
  provider.put(2, 3, constant_bundle(extent, 0.5f, 0.0f, 1.0f, 0.0f));
  provider.put(1, 3, constant_bundle(extent, 0.25f, 0.0f, 5.0f, 0.0f));

  ChainConfig direct;
  direct.schedule = ScheduleMode::DirectOnly;
  const std::vector<ChainState> d = track(3, provider, direct);
  CHECK(d[2].x[0] == doctest::Approx(0.25));
  CHECK(d[2].variance[0] == 5.0);

  ChainConfig chain;
  chain.schedule = ScheduleMode::ConsecutiveOnly;
  const std::vector<ChainState> c = track(3, provider, chain);
  CHECK(c[2].x[0] == doctest::Approx(1.0));
  CHECK(c[2].variance[0] == 2.0);
}

TEST_CASE("is_occluded thresholds the sampled score strictly") {
  ChainState state = identity_state({2, 2});
  state.occlusion = {0.021, 0.02, 0.0, 1.0};
  CHECK(is_occluded(state, {0.0, 0.0}, 0.02));
  CHECK_FALSE(is_occluded(state, {1.0, 0.0}, 0.02));  // exactly at the threshold
  CHECK_FALSE(is_occluded(state, {0.0, 1.0}, 0.02));
  CHECK(is_occluded(state, {1.0, 1.0}, 0.02));
  CHECK_THROWS_AS(is_occluded(state, {5.0, 0.0}, 0.02), Error);
}

TEST_CASE("zero-variance oracle with integer translation tracks exactly") {
  SceneSpec scene;
  scene.extent = ImageExtent{16, 8};
  scene.frame_count = 4;
  AffineTransform step;
  step.a13 = 1.0;  // +1 px/frame in x
  scene.background = repeated_affine_step(scene.frame_count, step);

  const OracleProvider provider(scene);
  ChainConfig config;
  const std::vector<ChainState> states = track(4, provider, config);
  const ChainState& last = states[3];
  std::size_t i = 0;
  for (int row = 0; row < scene.extent.height; ++row) {
    for (int col = 0; col < scene.extent.width; ++col, ++i) {
      if (col + 3 > scene.extent.width - 1) continue;  // leaves the image
      CHECK(last.x[i] == static_cast<double>(col + 3));
      CHECK(last.y[i] == static_cast<double>(row));
      CHECK(last.variance[i] == 0.0);
      CHECK(last.occlusion[i] == 0.0);
    }
  }
}
