#pragma once

#include <string_view>
#include <vector>

#include "mft/tracks.hpp"

namespace mft {

// Combination rules for two independently configured trackers. Under every
// strategy except the two pass-throughs, visibility comes from tracker A.
enum class EnsembleStrategy {
  AOnly,
  BOnly,
  PositionBOcclusionA,   // visibility from A, position always from B
  SelectiveBPosition,    // visibility from A, position from B only where B
                         // itself predicts visible, else from A
};

EnsembleStrategy parse_ensemble_strategy(std::string_view name);
const char* ensemble_strategy_name(EnsembleStrategy strategy);

// Merges the outputs of two trackers over identical query points and frames.
// The per-frame source tag records which tracker supplied each position, and
// the reported variance follows the position's source tracker.
std::vector<TrackRecord> combine(const std::vector<TrackRecord>& pred_a,
                                 const std::vector<TrackRecord>& pred_b,
                                 EnsembleStrategy strategy);

}  // namespace mft
