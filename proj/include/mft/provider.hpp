#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mft/geometry.hpp"

namespace mft {

enum class ProviderKind { ConsecutiveFlow, WideBaselineMatcher, Oracle };

// Constants controlling how matcher-style certainty outputs are converted
// into the variance/occlusion form the chain engine consumes, plus the
// per-backend occlusion threshold used downstream.
struct AdapterConfig {
  // Certainty cutoff theta_rho. Required for matcher adaptation; deliberately
  // empty for backends whose cutoff has no published value.
  std::optional<double> certainty_threshold;
  double low_certainty_variance = 1000.0;
  // theta_o consumed by the chain engine and visibility decisions.
  double occlusion_threshold = 0.02;
  bool adapt_certainty = false;
};

// One flow query: source frame i to target frame j, 1-based, i < j.
struct FlowRequest {
  int source_frame = 0;
  int target_frame = 0;

  bool operator==(const FlowRequest&) const = default;
};

// The provider contract. Implementations must be deterministic (identical
// requests yield bit-identical bundles) and tolerate concurrent provide()
// calls for distinct requests. Matcher-kind providers return already-adapted
// variance/occlusion fields.
class FlowProvider {
 public:
  virtual ~FlowProvider() = default;

  virtual ImageExtent extent() const = 0;
  virtual int frame_count() const = 0;
  virtual FlowBundle provide(const FlowRequest& request) const = 0;

 protected:
  // Raises InvalidFrame for i >= j or nonpositive indices, MissingPair for
  // frames beyond the sequence.
  void validate_request(const FlowRequest& request) const;
};

// o = 1 - rho, pointwise.
ScalarField certainty_to_occlusion(const ScalarField& certainty);

// sigma = 0 where rho > theta_rho (strict), else low_certainty_variance.
ScalarField certainty_to_variance(const ScalarField& certainty, const AdapterConfig& config);

// Builds a full bundle from matcher output (flow + certainty).
FlowBundle adapt_matcher_output(FlowField flow, const ScalarField& certainty,
                                const AdapterConfig& config);

// Published per-backend defaults: "raft-like" (theta_o = 0.02, no certainty
// adaptation), "dkm-like" (theta_o = 0.95, theta_rho = 0.05), "roma-like"
// (theta_o = 0.95, theta_rho left unset and required from configuration).
AdapterConfig default_adapter_config(std::string_view backend_name);

// Provider kind implied by a backend name: raft-like providers ship
// variance/occlusion, matcher-like providers ship certainty.
ProviderKind provider_kind_for_backend(std::string_view backend_name);

}  // namespace mft
