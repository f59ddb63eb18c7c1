#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mft/chain.hpp"
#include "mft/provider.hpp"

namespace mft {

// FlowPack plane-mask bits, in storage order.
enum FlowPackPlane : std::uint32_t {
  kPlaneFlowU = 1u << 0,
  kPlaneFlowV = 1u << 1,
  kPlaneVariance = 1u << 2,
  kPlaneOcclusion = 1u << 3,
  kPlaneCertainty = 1u << 4,
};

// Binary flow container: 8-byte magic "MFTFLOW1", little-endian u32 width,
// height and plane mask, then the masked planes as row-major float32 in mask
// bit order. Flow channels come in pairs: bits 0 and 1 are either both set
// (full flow file) or both clear (scalar sidecar).
struct FlowPack {
  ImageExtent extent;
  std::uint32_t mask = 0;
  std::vector<float> flow_u;
  std::vector<float> flow_v;
  std::vector<float> variance;
  std::vector<float> occlusion;
  std::vector<float> certainty;
};

FlowPack read_flowpack(const std::filesystem::path& path);
void write_flowpack(const FlowPack& pack, const std::filesystem::path& path);

FlowPack pack_from_bundle(const FlowBundle& bundle);
FlowBundle bundle_from_pack(const FlowPack& pack);  // needs flow+variance+occlusion

// Middlebury interchange: magic "PIEH" (the float 202021.25), little-endian
// i32 width and height, then interleaved float32 (u, v) per pixel.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& flow, const std::filesystem::path& path);

// Writes via a temporary in the same directory plus rename, so interrupted
// runs never leave a partial file under the final name.
void atomic_write_bytes(const std::filesystem::path& path, const std::string& bytes);

// Canonical per-pair file stem: flow_{i:05}_{j:05}, 1-based frame indices.
std::string pair_file_stem(int source_frame, int target_frame);

// Reads flow bundles from a directory of FlowPack files (or .flo files with
// FlowPack scalar sidecars). ConsecutiveFlow directories must carry variance
// and occlusion planes; WideBaselineMatcher directories carry certainty,
// adapted on read with the supplied config.
class FileProvider final : public FlowProvider {
 public:
  FileProvider(std::filesystem::path directory, int frame_count, ProviderKind kind,
               AdapterConfig adapter = {});

  ImageExtent extent() const override { return extent_; }
  int frame_count() const override { return frame_count_; }
  FlowBundle provide(const FlowRequest& request) const override;

 private:
  std::filesystem::path directory_;
  int frame_count_;
  ProviderKind kind_;
  AdapterConfig adapter_;
  ImageExtent extent_;
};

enum class ProviderFileFormat { FlowPack, FloWithSidecar };

// Emits the given frame pairs of a provider as a file-provider directory.
void emit_provider_directory(const FlowProvider& provider,
                             const std::vector<FlowRequest>& pairs,
                             const std::filesystem::path& directory,
                             ProviderFileFormat format = ProviderFileFormat::FlowPack);

// Frame pairs needed to run a schedule mode over frames 1..frame_count. The
// Mft set is a superset of both the consecutive and the direct set.
std::vector<FlowRequest> schedule_pairs(int frame_count, int max_candidates,
                                        ScheduleMode mode);
std::vector<FlowRequest> all_pairs(int frame_count);

}  // namespace mft
