#pragma once

#include <span>
#include <vector>

#include "mft/geometry.hpp"
#include "mft/provider.hpp"

namespace mft {

// Which candidate set update_frame evaluates at frame j. Mft is the
// logarithmic schedule; ConsecutiveOnly fixes it to {1} (plain chaining);
// DirectOnly fixes it to {j-1}, i.e. a single flow from the reference frame.
enum class ScheduleMode { Mft, ConsecutiveOnly, DirectOnly };

struct ChainConfig {
  int max_candidates = 5;            // K
  double occlusion_threshold = 0.02; // theta_o
  ScheduleMode schedule = ScheduleMode::Mft;
  // Out-of-bounds policy is fixed: a chain that leaves the image is
  // disqualified, and a pixel with no in-bounds candidate is marked occluded.
};

// Dense per-reference-pixel tracking state at one frame: predicted position,
// accumulated variance and accumulated occlusion score. Arrays are row-major
// on the reference extent.
struct ChainState {
  ImageExtent extent;
  int frame = 1;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> variance;
  std::vector<double> occlusion;

  Point position_at(std::size_t pixel) const { return Point{x[pixel], y[pixel]}; }
};

// One evaluated chain candidate at frame j via intermediate frame i = j - delta.
struct CandidateScore {
  int source_frame = 0;
  int delta = 0;
  double chained_variance = 0.0;  // may be +inf when the chain left the image
  double chained_occlusion = 0.0;
  bool left_bounds = false;
  double score = 0.0;  // -chained_variance, or -inf when disqualified
  Point position;      // advanced position (unchanged when left_bounds)
};

// Candidate temporal gaps at frame j: powers of two 1, 2, 4, ... while the
// intermediate frame stays past frame 1, then j-1 itself, ascending, at most
// max_candidates entries.
std::vector<int> delta_schedule(int frame, int max_candidates);

// Variance accumulates additively along a chain.
double chain_variance(double prefix, double step);

// Occlusion accumulates as a running maximum along a chain.
double chain_occlusion(double prefix, double step);

// -chained_variance, or -inf when the chained occlusion exceeds theta_o
// (strictly) or the chain left the image.
double score_candidate(double chained_variance, double chained_occlusion,
                       double occlusion_threshold, bool left_bounds);

// Evaluates one candidate for one reference pixel: advances the stored
// position through the step bundle and chains variance/occlusion.
CandidateScore evaluate_candidate(const ChainState& prior, std::size_t pixel,
                                  const FlowBundle& step, int delta,
                                  double occlusion_threshold);

// True if candidate a should be preferred over b. Finite scores win by value
// with ties broken toward the larger delta (shorter chain). When every score
// is -inf the ordering falls back to minimal chained occlusion, then minimal
// chained variance, then larger delta.
bool candidate_preferred(const CandidateScore& a, const CandidateScore& b);

// Identity state for the reference frame: every pixel at its own center,
// zero variance, zero occlusion.
ChainState identity_state(ImageExtent extent);

// Computes the state at `frame` from the states of all earlier frames
// (history[k] must hold frame k+1). Requires a state for every scheduled
// intermediate frame and a provider bundle for every scheduled pair.
ChainState update_frame(std::span<const ChainState> history, int frame,
                        const FlowProvider& provider, const ChainConfig& config);

// Runs the tracker causally over frames 1..frame_count and returns all
// states. Retains every frame's state; only frames reachable by a future
// schedule (powers of two back from any j, plus frame 1) are strictly
// required, so callers tracking very long sequences may drop the rest.
std::vector<ChainState> track(int frame_count, const FlowProvider& provider,
                              const ChainConfig& config);

// True iff the accumulated occlusion score sampled at p exceeds theta_o.
bool is_occluded(const ChainState& state, Point p, double occlusion_threshold);

}  // namespace mft
