#include <doctest.h>

#include <vector>

#include "mft/ensemble.hpp"
#include "mft/metrics.hpp"
#include "mft/rng.hpp"

using namespace mft;

namespace {

std::vector<TrackRecord> make_tracker(int points, int frames, char tag, SplitMix64& rng) {
  std::vector<TrackRecord> records;
  for (int p = 0; p < points; ++p) {
    TrackRecord r;
    r.point_id = p;
    r.query = {static_cast<double>(p), 0.0};
    for (int f = 0; f < frames; ++f) {
      r.position.push_back({rng.next_uniform(0.0, 10.0), rng.next_uniform(0.0, 10.0)});
      r.visible.push_back(rng.next_unit() < 0.8 ? 1 : 0);
      r.variance.push_back(rng.next_unit());
      r.source.push_back(tag);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

TEST_CASE("pass-through strategies return the chosen tracker") {
  SplitMix64 rng(1);
  const auto a = make_tracker(3, 4, 'A', rng);
  const auto b = make_tracker(3, 4, 'B', rng);
  const auto only_a = combine(a, b, EnsembleStrategy::AOnly);
  const auto only_b = combine(a, b, EnsembleStrategy::BOnly);
  for (int p = 0; p < 3; ++p) {
    CHECK(only_a[p].position == a[p].position);
    CHECK(only_a[p].visible == a[p].visible);
    CHECK(only_b[p].position == b[p].position);
    CHECK(only_b[p].visible == b[p].visible);
  }
}

TEST_CASE("position-b-occlusion-a takes all positions from B, visibility from A") {
  SplitMix64 rng(2);
  auto a = make_tracker(2, 3, 'A', rng);
  auto b = make_tracker(2, 3, 'B', rng);
  a[0].visible = {1, 1, 1};
  b[0].position[1] = {5.0, 5.0};
  a[0].position[1] = {9.0, 9.0};

  const auto combined = combine(a, b, EnsembleStrategy::PositionBOcclusionA);
  CHECK(combined[0].position[1] == Point{5.0, 5.0});
  CHECK(combined[0].visible[1] == 1);
  CHECK(combined[0].source[1] == 'B');
  CHECK(combined[0].variance[1] == b[0].variance[1]);
  for (int p = 0; p < 2; ++p) {
    CHECK(combined[p].visible == a[p].visible);
    CHECK(combined[p].position == b[p].position);
  }
}

TEST_CASE("selective-b-position falls back to A where B predicts occlusion") {
  SplitMix64 rng(3);
  auto a = make_tracker(1, 3, 'A', rng);
  auto b = make_tracker(1, 3, 'B', rng);
  a[0].visible = {1, 1, 1};
  b[0].visible = {1, 0, 1};
  a[0].position = {{0.0, 0.0}, {9.0, 9.0}, {1.0, 1.0}};
  b[0].position = {{0.5, 0.5}, {5.0, 5.0}, {2.0, 2.0}};

  const auto combined = combine(a, b, EnsembleStrategy::SelectiveBPosition);
  CHECK(combined[0].position[0] == Point{0.5, 0.5});  // B visible
  CHECK(combined[0].position[1] == Point{9.0, 9.0});  // B occluded: A's position
  CHECK(combined[0].position[2] == Point{2.0, 2.0});
  CHECK(combined[0].source[0] == 'B');
  CHECK(combined[0].source[1] == 'A');
  // Visibility stays A's even where B flags occlusion.
  CHECK(combined[0].visible == a[0].visible);
  CHECK(combined[0].variance[1] == a[0].variance[1]);
}

TEST_CASE("visibility pass-through makes OA identical to tracker A") {
  SplitMix64 rng(4);
  auto a = make_tracker(6, 8, 'A', rng);
  auto b = make_tracker(6, 8, 'B', rng);
  // Shared ground truth for evaluation.
  for (int p = 0; p < 6; ++p) {
    a[p].gt_position = a[p].position;
    a[p].gt_visible.assign(8, 1);
    b[p].gt_position = a[p].gt_position;
    b[p].gt_visible = a[p].gt_visible;
    b[p].query = a[p].query;
  }
  const double oa_a = occlusion_accuracy(a);
  for (EnsembleStrategy strategy :
       {EnsembleStrategy::PositionBOcclusionA, EnsembleStrategy::SelectiveBPosition}) {
    const auto combined = combine(a, b, strategy);
    CHECK(occlusion_accuracy(combined) == oa_a);
    const PrecisionRecall pr_a = visibility_precision_recall(a);
    const PrecisionRecall pr_c = visibility_precision_recall(combined);
    CHECK(pr_a.precision == pr_c.precision);
    CHECK(pr_a.recall == pr_c.recall);
  }
}

TEST_CASE("selective strategy degenerates at the extremes of B's visibility") {
  SplitMix64 rng(5);
  auto a = make_tracker(3, 5, 'A', rng);
  auto b = make_tracker(3, 5, 'B', rng);

  for (auto& r : b) r.visible.assign(5, 1);
  const auto all_visible = combine(a, b, EnsembleStrategy::SelectiveBPosition);
  const auto position_b = combine(a, b, EnsembleStrategy::PositionBOcclusionA);
  for (int p = 0; p < 3; ++p) {
    CHECK(all_visible[p].position == position_b[p].position);
  }

  for (auto& r : b) r.visible.assign(5, 0);
  const auto none_visible = combine(a, b, EnsembleStrategy::SelectiveBPosition);
  for (int p = 0; p < 3; ++p) {
    CHECK(none_visible[p].position == a[p].position);
    CHECK(none_visible[p].visible == a[p].visible);
  }
}

TEST_CASE("combine rejects mismatched query sets") {
  SplitMix64 rng(6);
  auto a = make_tracker(3, 4, 'A', rng);
  auto b = make_tracker(2, 4, 'B', rng);
  CHECK_THROWS_AS(combine(a, b, EnsembleStrategy::PositionBOcclusionA), Error);

  auto c = make_tracker(3, 4, 'B', rng);
  c[1].query.x += 1.0;
  CHECK_THROWS_AS(combine(a, c, EnsembleStrategy::SelectiveBPosition), Error);

  auto d = make_tracker(3, 5, 'B', rng);
  for (auto& r : d) r.query = Point{static_cast<double>(r.point_id), 0.0};
  CHECK_THROWS_AS(combine(a, d, EnsembleStrategy::SelectiveBPosition), Error);
}

TEST_CASE("strategy names round-trip") {
  for (EnsembleStrategy s :
       {EnsembleStrategy::AOnly, EnsembleStrategy::BOnly,
        EnsembleStrategy::PositionBOcclusionA, EnsembleStrategy::SelectiveBPosition}) {
    CHECK(parse_ensemble_strategy(ensemble_strategy_name(s)) == s);
  }
  CHECK_THROWS_AS(parse_ensemble_strategy("vote"), Error);
}
