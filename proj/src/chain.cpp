#include "mft/chain.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <utility>

namespace mft {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_config(const ChainConfig& config) {
  if (config.max_candidates < 1) {
    raise(ErrorCode::BadConfig, "max_candidates must be at least 1");
  }
  if (config.occlusion_threshold < 0.0 || config.occlusion_threshold > 1.0) {
    raise(ErrorCode::BadConfig, "occlusion_threshold must lie in [0, 1]");
  }
}

std::vector<int> schedule_for(const ChainConfig& config, int frame) {
  switch (config.schedule) {
    case ScheduleMode::Mft:
      return delta_schedule(frame, config.max_candidates);
    case ScheduleMode::ConsecutiveOnly:
      return {1};
    case ScheduleMode::DirectOnly:
      return {frame - 1};
  }
  raise(ErrorCode::BadConfig, "unknown schedule mode");
}

}  // namespace

std::vector<int> delta_schedule(int frame, int max_candidates) {
  if (frame < 2) {
    raise(ErrorCode::InvalidFrame,
          "delta schedule needs frame >= 2, got " + std::to_string(frame));
  }
  if (max_candidates < 1) {
    raise(ErrorCode::BadConfig, "max_candidates must be at least 1");
  }
  std::vector<int> deltas;
  // Powers of two stay only while the intermediate frame j - delta is past
  // frame 1; the final entry j-1 reaches frame 1 itself.
  long long power = 1;
  for (int k = 1; k < max_candidates && power <= frame - 2; ++k, power <<= 1) {
    deltas.push_back(static_cast<int>(power));
  }
  deltas.push_back(frame - 1);
  return deltas;
}

double chain_variance(double prefix, double step) { return prefix + step; }

double chain_occlusion(double prefix, double step) { return std::max(prefix, step); }

double score_candidate(double chained_variance, double chained_occlusion,
                       double occlusion_threshold, bool left_bounds) {
  if (left_bounds || chained_occlusion > occlusion_threshold) {
    return -kInf;
  }
  return -chained_variance;
}

CandidateScore evaluate_candidate(const ChainState& prior, std::size_t pixel,
                                  const FlowBundle& step, int delta,
                                  double occlusion_threshold) {
  CandidateScore candidate;
  candidate.source_frame = prior.frame;
  candidate.delta = delta;

  const Point at = prior.position_at(pixel);
  const AdvanceResult advanced = advance_point(at, step.flow);
  if (advanced.out_of_bounds) {
    candidate.chained_variance = kInf;
    candidate.chained_occlusion = 1.0;
    candidate.left_bounds = true;
    candidate.score = -kInf;
    candidate.position = at;
    return candidate;
  }

  const ImageExtent extent = step.extent();
  const double step_variance = sample_bilinear_clamped(step.variance.values(), extent, at);
  const double step_occlusion = sample_bilinear_clamped(step.occlusion.values(), extent, at);
  candidate.chained_variance = chain_variance(prior.variance[pixel], step_variance);
  candidate.chained_occlusion = chain_occlusion(prior.occlusion[pixel], step_occlusion);
  candidate.left_bounds = false;
  candidate.score = score_candidate(candidate.chained_variance, candidate.chained_occlusion,
                                    occlusion_threshold, false);
  candidate.position = advanced.point;
  return candidate;
}

bool candidate_preferred(const CandidateScore& a, const CandidateScore& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.score == -kInf) {
    if (a.chained_occlusion != b.chained_occlusion) {
      return a.chained_occlusion < b.chained_occlusion;
    }
    if (a.chained_variance != b.chained_variance) {
      return a.chained_variance < b.chained_variance;
    }
  }
  return a.delta > b.delta;
}

ChainState identity_state(ImageExtent extent) {
  if (!extent.valid()) {
    raise(ErrorCode::BadConfig, "image extent must be at least 1x1");
  }
  ChainState state;
  state.extent = extent;
  state.frame = 1;
  const std::size_t n = extent.pixel_count();
  state.x.resize(n);
  state.y.resize(n);
  state.variance.assign(n, 0.0);
  state.occlusion.assign(n, 0.0);
  std::size_t i = 0;
  for (int row = 0; row < extent.height; ++row) {
    for (int col = 0; col < extent.width; ++col, ++i) {
      state.x[i] = static_cast<double>(col);
      state.y[i] = static_cast<double>(row);
    }
  }
  return state;
}

ChainState update_frame(std::span<const ChainState> history, int frame,
                        const FlowProvider& provider, const ChainConfig& config) {
  validate_config(config);
  if (frame < 2) {
    raise(ErrorCode::InvalidFrame, "update_frame needs frame >= 2");
  }

  const std::vector<int> deltas = schedule_for(config, frame);

  struct Step {
    int delta;
    const ChainState* prior;
    FlowBundle bundle;
  };
  std::vector<Step> steps;
  steps.reserve(deltas.size());
  const ImageExtent extent = provider.extent();
  for (int delta : deltas) {
    const int source = frame - delta;
    if (source < 1 || static_cast<std::size_t>(source) > history.size() ||
        history[source - 1].frame != source) {
      raise(ErrorCode::MissingState,
            "no prior state for frame " + std::to_string(source) +
                " needed at frame " + std::to_string(frame));
    }
    const ChainState& prior = history[source - 1];
    if (!(prior.extent == extent)) {
      raise(ErrorCode::ExtentMismatch, "prior state extent differs from provider extent");
    }
    FlowBundle bundle = provider.provide(FlowRequest{source, frame});
    if (!(bundle.extent() == extent)) {
      raise(ErrorCode::ExtentMismatch,
            "provider bundle extent differs for pair (" + std::to_string(source) + ", " +
                std::to_string(frame) + ")");
    }
    steps.push_back(Step{delta, &prior, std::move(bundle)});
  }

  ChainState next;
  next.extent = extent;
  next.frame = frame;
  const std::size_t n = extent.pixel_count();
  next.x.resize(n);
  next.y.resize(n);
  next.variance.resize(n);
  next.occlusion.resize(n);

  // Each pixel is independent given the read-only prior states, so this loop
  // is safe to parallelize over pixels.
  for (std::size_t pixel = 0; pixel < n; ++pixel) {
    CandidateScore best;
    bool have_best = false;
    for (const Step& step : steps) {
      CandidateScore candidate = evaluate_candidate(*step.prior, pixel, step.bundle,
                                                    step.delta, config.occlusion_threshold);
      if (!have_best || candidate_preferred(candidate, best)) {
        best = candidate;
        have_best = true;
      }
    }
    next.x[pixel] = best.position.x;
    next.y[pixel] = best.position.y;
    next.variance[pixel] = best.chained_variance;
    next.occlusion[pixel] = best.chained_occlusion;
  }
  return next;
}

std::vector<ChainState> track(int frame_count, const FlowProvider& provider,
                              const ChainConfig& config) {
  validate_config(config);
  if (frame_count < 1) {
    raise(ErrorCode::InvalidFrame, "track needs at least one frame");
  }
  std::vector<ChainState> states;
  states.reserve(static_cast<std::size_t>(frame_count));
  states.push_back(identity_state(provider.extent()));
  for (int frame = 2; frame <= frame_count; ++frame) {
    states.push_back(update_frame(states, frame, provider, config));
  }
  return states;
}

bool is_occluded(const ChainState& state, Point p, double occlusion_threshold) {
  return sample_bilinear(std::span<const double>(state.occlusion), state.extent, p) >
         occlusion_threshold;
}

}  // namespace mft
