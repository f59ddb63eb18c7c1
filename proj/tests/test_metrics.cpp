#include <doctest.h>

#include <algorithm>
#include <vector>

#include "metrics_oracle.hpp"
#include "mft/metrics.hpp"
#include "mft/rng.hpp"

using namespace mft;
using mft::testing::oracle_evaluate;

namespace {

// One record, `frames` frames, GT pinned at the origin and always visible.
TrackRecord simple_record(int frames) {
  TrackRecord r;
  r.point_id = 0;
  r.query = {0.0, 0.0};
  r.position.assign(static_cast<std::size_t>(frames), Point{0.0, 0.0});
  r.visible.assign(static_cast<std::size_t>(frames), 1);
  r.variance.assign(static_cast<std::size_t>(frames), 0.0);
  r.source.assign(static_cast<std::size_t>(frames), 'A');
  r.gt_position = r.position;
  r.gt_visible = r.visible;
  return r;
}

std::vector<double> default_thresholds() { return {1.0, 2.0, 4.0, 8.0, 16.0}; }

std::vector<TrackRecord> random_fixture(SplitMix64& rng, int max_points = 10,
                                        int max_frames = 10) {
  const int points = 1 + static_cast<int>(rng.next_uniform(0.0, max_points));
  const int frames = 2 + static_cast<int>(rng.next_uniform(0.0, max_frames - 1));
  std::vector<TrackRecord> records;
  for (int p = 0; p < points; ++p) {
    TrackRecord r;
    r.point_id = p;
    r.query = {rng.next_uniform(0.0, 9.0), rng.next_uniform(0.0, 9.0)};
    for (int f = 0; f < frames; ++f) {
      const Point gt{rng.next_uniform(0.0, 30.0), rng.next_uniform(0.0, 30.0)};
      Point pred = gt;
      if (rng.next_unit() < 0.7) {
        pred.x += rng.next_uniform(-20.0, 20.0);
        pred.y += rng.next_uniform(-20.0, 20.0);
      }
      r.position.push_back(pred);
      r.gt_position.push_back(gt);
      r.visible.push_back(rng.next_unit() < 0.7 ? 1 : 0);
      r.gt_visible.push_back(rng.next_unit() < 0.7 ? 1 : 0);
      r.variance.push_back(0.0);
      r.source.push_back('A');
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

TEST_CASE("occlusion accuracy counts matching visibility over frames 2..N") {
  SUBCASE("perfect predictions") {
    std::vector<TrackRecord> records{simple_record(5)};
    CHECK(occlusion_accuracy(records) == 1.0);
  }
  SUBCASE("fully negated predictions") {
    TrackRecord r = simple_record(5);
    for (std::size_t f = 1; f < r.visible.size(); ++f) r.visible[f] = 0;
    CHECK(occlusion_accuracy({r}) == 0.0);
  }
  SUBCASE("hand-counted fraction, frame 1 excluded") {
    // 4 points x 1 evaluated frame, 3 correct.
    std::vector<TrackRecord> records;
    for (int p = 0; p < 4; ++p) {
      TrackRecord r = simple_record(2);
      r.point_id = p;
      r.visible[0] = 0;  // frame 1 disagreement must not count
      if (p == 3) r.visible[1] = 0;
      records.push_back(r);
    }
    CHECK(occlusion_accuracy(records) == 0.75);
  }
  SUBCASE("missing ground truth is rejected") {
    TrackRecord r = simple_record(3);
    r.gt_visible.clear();
    r.gt_position.clear();
    CHECK_THROWS_AS(occlusion_accuracy({r}), Error);
  }
}

TEST_CASE("position accuracy hand cases") {
  SUBCASE("all errors zero") {
    const PositionAccuracy acc = position_accuracy({simple_record(4)});
    for (double f : acc.delta_at) CHECK(f == 1.0);
    CHECK(acc.delta_avg == 1.0);
  }
  SUBCASE("single pair with error 3") {
    TrackRecord r = simple_record(2);
    r.position[1] = {3.0, 0.0};
    const PositionAccuracy acc = position_accuracy({r});
    CHECK(acc.delta_at == std::vector<double>{0.0, 0.0, 1.0, 1.0, 1.0});
    CHECK(acc.delta_avg == doctest::Approx(0.6));
  }
  SUBCASE("two pairs with errors 0.5 and 20") {
    TrackRecord a = simple_record(2);
    a.position[1] = {0.5, 0.0};
    TrackRecord b = simple_record(2);
    b.point_id = 1;
    b.position[1] = {20.0, 0.0};
    const PositionAccuracy acc = position_accuracy({a, b});
    CHECK(acc.delta_avg == doctest::Approx(0.5));
  }
  SUBCASE("error exactly at a threshold misses it") {
    TrackRecord r = simple_record(2);
    r.position[1] = {1.0, 0.0};
    const PositionAccuracy acc = position_accuracy({r});
    CHECK(acc.delta_at[0] == 0.0);  // strict "<"
    CHECK(acc.delta_at[1] == 1.0);
  }
  SUBCASE("GT-occluded pairs are excluded entirely") {
    TrackRecord r = simple_record(3);
    r.gt_visible[1] = 0;
    r.position[1] = {100.0, 0.0};
    const PositionAccuracy acc = position_accuracy({r});
    CHECK(acc.total == 1);
    CHECK(acc.delta_avg == 1.0);
  }
  SUBCASE("no GT-visible pairs raises EmptyEvalSet") {
    TrackRecord r = simple_record(3);
    r.gt_visible[1] = 0;
    r.gt_visible[2] = 0;
    try {
      position_accuracy({r});
      FAIL("expected EmptyEvalSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyEvalSet);
    }
  }
}

TEST_CASE("delta_at is monotone in the threshold") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto records = random_fixture(rng);
    bool any_gt_visible = false;
    for (const auto& r : records) {
      for (std::size_t f = 1; f < r.gt_visible.size(); ++f) {
        any_gt_visible |= r.gt_visible[f] != 0;
      }
    }
    if (!any_gt_visible) continue;
    const PositionAccuracy acc = position_accuracy(records);
    for (std::size_t t = 1; t < acc.delta_at.size(); ++t) {
      CHECK(acc.delta_at[t - 1] <= acc.delta_at[t]);
    }
  }
}

TEST_CASE("average jaccard hand cases") {
  SUBCASE("perfect predictions") {
    CHECK(average_jaccard({simple_record(4)}) == 1.0);
  }
  SUBCASE("everything predicted occluded while GT visible") {
    TrackRecord r = simple_record(3);
    r.visible[1] = 0;
    r.visible[2] = 0;
    CHECK(average_jaccard({r}) == 0.0);
  }
  SUBCASE("two visible points with errors 0.5 and 3") {
    TrackRecord a = simple_record(2);
    a.position[1] = {0.5, 0.0};
    TrackRecord b = simple_record(2);
    b.point_id = 1;
    b.position[1] = {0.0, 3.0};
    // t=1,2: one TP, the far point is both FP and FN -> 1/3.
    // t=4,8,16: both TP -> 1. AJ = (1/3 + 1/3 + 3) / 5 = 11/15.
    CHECK(average_jaccard({a, b}) == doctest::Approx(11.0 / 15.0));
  }
}

TEST_CASE("visibility precision and recall") {
  SUBCASE("perfect with both classes present") {
    TrackRecord r = simple_record(3);
    r.gt_visible[2] = 0;
    r.visible[2] = 0;
    const PrecisionRecall pr = visibility_precision_recall({r});
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);
  }
  SUBCASE("everything predicted visible") {
    TrackRecord r = simple_record(5);
    r.gt_visible[2] = 0;
    r.gt_visible[3] = 0;
    const PrecisionRecall pr = visibility_precision_recall({r});
    CHECK(pr.recall == 1.0);
    CHECK(pr.precision == doctest::Approx(0.5));  // 2 of 4 predicted-visible are GT-visible
  }
  SUBCASE("hand confusion matrix") {
    // 3 GT-visible of which 2 predicted visible, plus 1 GT-occluded predicted
    // visible.
    std::vector<TrackRecord> records;
    for (int p = 0; p < 4; ++p) {
      TrackRecord r = simple_record(2);
      r.point_id = p;
      records.push_back(r);
    }
    records[0].visible[1] = 0;        // FN
    records[3].gt_visible[1] = 0;     // FP (predicted visible)
    const PrecisionRecall pr = visibility_precision_recall(records);
    CHECK(pr.precision == doctest::Approx(2.0 / 3.0));
    CHECK(pr.recall == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("degenerate denominators are flagged") {
    TrackRecord r = simple_record(3);
    r.visible[1] = 0;
    r.visible[2] = 0;
    r.gt_visible[1] = 0;
    r.gt_visible[2] = 0;
    const PrecisionRecall pr = visibility_precision_recall({r});
    CHECK(pr.precision_degenerate);
    CHECK(pr.recall_degenerate);
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);
  }
}

TEST_CASE("predicted-visibility slices") {
  SUBCASE("all predicted visible: slice equals full report") {
    TrackRecord r = simple_record(4);
    r.position[2] = {5.0, 0.0};
    const VisibilitySliceReport slices = slice_by_predicted_visibility({r});
    REQUIRE(slices.predicted_visible.has_value());
    CHECK_FALSE(slices.predicted_occluded.has_value());
    CHECK(slices.predicted_visible->delta_avg == slices.all.delta_avg);
    CHECK(slices.predicted_visible->total == slices.all.total);
  }
  SUBCASE("calibrated predictor scores better on its visible slice") {
    // 6 GT-visible pairs; the predictor flags exactly the two large-error
    // frames as occluded.
    TrackRecord r = simple_record(7);
    r.position[2] = {30.0, 0.0};
    r.visible[2] = 0;
    r.position[5] = {0.0, 25.0};
    r.visible[5] = 0;
    r.position[3] = {0.5, 0.0};
    const VisibilitySliceReport slices = slice_by_predicted_visibility({r});
    REQUIRE(slices.predicted_visible.has_value());
    REQUIRE(slices.predicted_occluded.has_value());
    CHECK(slices.predicted_visible->delta_avg >= slices.all.delta_avg);
    CHECK(slices.predicted_visible->delta_avg > slices.predicted_occluded->delta_avg);
  }
}

TEST_CASE("metrics match the brute-force confusion oracle exactly") {
  SplitMix64 rng(2024);
  const std::vector<double> thresholds = default_thresholds();
  for (int trial = 0; trial < 200; ++trial) {
    const auto records = random_fixture(rng);
    const auto oracle = oracle_evaluate(records, thresholds);

    CHECK(occlusion_accuracy(records) == oracle.oa);
    const double aj = average_jaccard(records, thresholds);
    CHECK(aj == oracle.aj);
    const PrecisionRecall pr = visibility_precision_recall(records);
    CHECK(pr.precision == oracle.precision);
    CHECK(pr.recall == oracle.recall);
    CHECK(pr.precision_degenerate == oracle.precision_degenerate);
    CHECK(pr.recall_degenerate == oracle.recall_degenerate);

    if (oracle.delta_avg.has_value()) {
      const PositionAccuracy acc = position_accuracy(records, thresholds);
      CHECK(acc.delta_avg == *oracle.delta_avg);
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        CHECK(acc.delta_at[t] == oracle.delta_at[t]);
      }
    } else {
      CHECK_THROWS_AS(position_accuracy(records, thresholds), Error);
    }
  }
}

TEST_CASE("metrics are permutation invariant") {
  SplitMix64 rng(31337);
  auto records = random_fixture(rng);
  // Ensure at least one GT-visible pair so delta is defined.
  records[0].gt_visible.back() = 1;
  const double oa = occlusion_accuracy(records);
  const double aj = average_jaccard(records);
  const PositionAccuracy acc = position_accuracy(records);

  std::reverse(records.begin(), records.end());
  CHECK(occlusion_accuracy(records) == oa);
  CHECK(average_jaccard(records) == aj);
  CHECK(position_accuracy(records).delta_avg == acc.delta_avg);
}

TEST_CASE("AJ never exceeds delta_avg when visibility is perfect") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    auto records = random_fixture(rng);
    bool any_visible = false;
    for (auto& r : records) {
      r.visible = r.gt_visible;  // perfect visibility predictions
      for (std::size_t f = 1; f < r.gt_visible.size(); ++f) {
        any_visible |= r.gt_visible[f] != 0;
      }
    }
    if (!any_visible) continue;
    const double aj = average_jaccard(records);
    const PositionAccuracy acc = position_accuracy(records);
    CHECK(aj <= acc.delta_avg + 1e-12);
  }
}

TEST_CASE("evaluate rescales coordinates to the evaluation extent") {
  TrackRecord r = simple_record(2);
  r.position[1] = {1.0, 0.0};  // 1 px native error
  EvalOptions options;
  options.native_extent = {64, 64};
  options.evaluation_extent = {256, 256};  // error becomes 4 px
  const EvalReport report = evaluate({r}, options);
  CHECK(report.position.delta_at == std::vector<double>{0.0, 0.0, 0.0, 1.0, 1.0});
  CHECK(report.evaluation_extent == ImageExtent{256, 256});

  options.evaluation_extent = options.native_extent;  // native convention
  const EvalReport native = evaluate({r}, options);
  CHECK(native.position.delta_at == std::vector<double>{0.0, 1.0, 1.0, 1.0, 1.0});
}

TEST_CASE("sample_dense_prediction reads states back") {
  ChainState state = identity_state({3, 1});
  state.x = {0.0, 2.0, 4.0};
  state.y = {0.0, 0.0, 0.0};
  state.variance = {0.5, 1.5, 2.5};
  state.occlusion = {0.0, 0.02, 0.6};

  SUBCASE("integer query returns the stored pixel state") {
    const DensePrediction p = sample_dense_prediction(state, {1.0, 0.0}, 0.02);
    CHECK(p.position == Point{2.0, 0.0});
    CHECK(p.visible);  // exactly at the threshold stays visible
    CHECK(p.variance == 1.5);
  }
  SUBCASE("midpoint query interpolates the position map") {
    const DensePrediction p = sample_dense_prediction(state, {0.5, 0.0}, 0.02);
    CHECK(p.position.x == doctest::Approx(1.0));
  }
  SUBCASE("occluded query") {
    const DensePrediction p = sample_dense_prediction(state, {2.0, 0.0}, 0.02);
    CHECK_FALSE(p.visible);
  }
  SUBCASE("out-of-bounds query is rejected") {
    CHECK_THROWS_AS(sample_dense_prediction(state, {3.5, 0.0}, 0.02), Error);
  }
}
