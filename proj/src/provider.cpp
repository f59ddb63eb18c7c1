#include "mft/provider.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mft {

void FlowProvider::validate_request(const FlowRequest& request) const {
  if (request.source_frame < 1 || request.target_frame <= request.source_frame) {
    raise(ErrorCode::InvalidFrame,
          "flow request needs 1 <= i < j, got (" + std::to_string(request.source_frame) +
              ", " + std::to_string(request.target_frame) + ")");
  }
  if (request.target_frame > frame_count()) {
    raise(ErrorCode::MissingPair,
          "frame " + std::to_string(request.target_frame) + " beyond sequence of " +
              std::to_string(frame_count()) + " frames");
  }
}

namespace {

void require_certainty(const ScalarField& field) {
  if (field.role() != FieldRole::Certainty) {
    raise(ErrorCode::RoleMismatch, "expected certainty field, got " +
                                       std::string(field_role_name(field.role())));
  }
}

}  // namespace

ScalarField certainty_to_occlusion(const ScalarField& certainty) {
  require_certainty(certainty);
  std::vector<float> out(certainty.values().size());
  const auto rho = certainty.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(1.0 - static_cast<double>(rho[i]));
  }
  return ScalarField(certainty.extent(), FieldRole::Occlusion, std::move(out));
}

ScalarField certainty_to_variance(const ScalarField& certainty, const AdapterConfig& config) {
  require_certainty(certainty);
  if (!config.certainty_threshold.has_value()) {
    raise(ErrorCode::BadConfig,
          "certainty_threshold is required for matcher adaptation and has no default "
          "for this backend");
  }
  const double threshold = *config.certainty_threshold;
  if (threshold < 0.0 || threshold > 1.0) {
    raise(ErrorCode::BadConfig, "certainty_threshold must lie in [0, 1]");
  }
  if (!(config.low_certainty_variance > 0.0)) {
    raise(ErrorCode::BadConfig, "low_certainty_variance must be positive");
  }
  const float low = static_cast<float>(config.low_certainty_variance);
  std::vector<float> out(certainty.values().size());
  const auto rho = certainty.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<double>(rho[i]) > threshold ? 0.0f : low;
  }
  return ScalarField(certainty.extent(), FieldRole::Variance, std::move(out));
}

FlowBundle adapt_matcher_output(FlowField flow, const ScalarField& certainty,
                                const AdapterConfig& config) {
  ScalarField variance = certainty_to_variance(certainty, config);
  ScalarField occlusion = certainty_to_occlusion(certainty);
  return FlowBundle(std::move(flow), std::move(variance), std::move(occlusion));
}

AdapterConfig default_adapter_config(std::string_view backend_name) {
  AdapterConfig config;
  if (backend_name == "raft-like") {
    config.occlusion_threshold = 0.02;
    config.adapt_certainty = false;
    return config;
  }
  if (backend_name == "dkm-like") {
    config.occlusion_threshold = 0.95;
    config.adapt_certainty = true;
    config.certainty_threshold = 0.05;
    return config;
  }
  if (backend_name == "roma-like") {
    config.occlusion_threshold = 0.95;
    config.adapt_certainty = true;
    // No published cutoff; must be set explicitly in configuration.
    config.certainty_threshold.reset();
    return config;
  }
  raise(ErrorCode::UnknownBackend, "unknown backend '" + std::string(backend_name) +
                                       "' (expected raft-like, dkm-like or roma-like)");
}

ProviderKind provider_kind_for_backend(std::string_view backend_name) {
  if (backend_name == "raft-like") return ProviderKind::ConsecutiveFlow;
  if (backend_name == "dkm-like" || backend_name == "roma-like") {
    return ProviderKind::WideBaselineMatcher;
  }
  raise(ErrorCode::UnknownBackend, "unknown backend '" + std::string(backend_name) + "'");
}

}  // namespace mft
