#include "mft/flow_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <utility>

namespace mft {

namespace {

constexpr char kFlowPackMagic[8] = {'M', 'F', 'T', 'F', 'L', 'O', 'W', '1'};
constexpr std::uint32_t kAllPlanes =
    kPlaneFlowU | kPlaneFlowV | kPlaneVariance | kPlaneOcclusion | kPlaneCertainty;
constexpr std::uint64_t kMaxPayloadBytes = 1ull << 38;
constexpr float kFloMagic = 202021.25f;

static_assert(std::endian::native == std::endian::little,
              "flow file I/O assumes a little-endian host");

void append_u32(std::string& out, std::uint32_t value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof value);
}

void append_i32(std::string& out, std::int32_t value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof value);
}

void append_f32(std::string& out, float value) {
  out.append(reinterpret_cast<const char*>(&value), sizeof value);
}

void append_plane(std::string& out, const std::vector<float>& plane) {
  out.append(reinterpret_cast<const char*>(plane.data()), plane.size() * sizeof(float));
}

std::string read_all_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t load_u32(const char* at) {
  std::uint32_t value;
  std::memcpy(&value, at, sizeof value);
  return value;
}

std::int32_t load_i32(const char* at) {
  std::int32_t value;
  std::memcpy(&value, at, sizeof value);
  return value;
}

std::vector<float> load_plane(const char* at, std::size_t count) {
  std::vector<float> plane(count);
  std::memcpy(plane.data(), at, count * sizeof(float));
  return plane;
}

void validate_mask(std::uint32_t mask) {
  if (mask == 0 || (mask & ~kAllPlanes) != 0) {
    raise(ErrorCode::MaskMismatch, "plane mask " + std::to_string(mask) + " is invalid");
  }
  const bool has_u = (mask & kPlaneFlowU) != 0;
  const bool has_v = (mask & kPlaneFlowV) != 0;
  if (has_u != has_v) {
    raise(ErrorCode::MaskMismatch, "flow-u and flow-v planes must be paired");
  }
}

void check_plane_size(const std::vector<float>& plane, bool expected, std::size_t pixels,
                      const char* name) {
  const std::size_t want = expected ? pixels : 0;
  if (plane.size() != want) {
    raise(ErrorCode::MaskMismatch,
          std::string(name) + " plane size disagrees with the mask");
  }
}

}  // namespace

void atomic_write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      raise(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      raise(ErrorCode::IoError, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    raise(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
  }
}

FlowPack read_flowpack(const std::filesystem::path& path) {
  const std::string bytes = read_all_bytes(path);
  constexpr std::size_t kHeaderSize = 8 + 4 + 4 + 4;
  if (bytes.size() < 8) {
    raise(ErrorCode::TruncatedFile, path.string() + " is shorter than the magic");
  }
  if (std::memcmp(bytes.data(), kFlowPackMagic, sizeof kFlowPackMagic) != 0) {
    raise(ErrorCode::BadMagic, path.string() + " is not a FlowPack file");
  }
  if (bytes.size() < kHeaderSize) {
    raise(ErrorCode::TruncatedFile, path.string() + " ends inside the header");
  }

  FlowPack pack;
  const std::uint32_t width = load_u32(bytes.data() + 8);
  const std::uint32_t height = load_u32(bytes.data() + 12);
  pack.mask = load_u32(bytes.data() + 16);
  validate_mask(pack.mask);
  if (width == 0 || height == 0) {
    raise(ErrorCode::TruncatedFile, path.string() + " declares an empty extent");
  }

  const std::uint64_t pixels = static_cast<std::uint64_t>(width) * height;
  const int planes = std::popcount(pack.mask);
  const std::uint64_t payload = pixels * static_cast<std::uint64_t>(planes) * 4;
  if (payload > kMaxPayloadBytes || bytes.size() - kHeaderSize < payload) {
    raise(ErrorCode::ExtentOverflow,
          path.string() + " declares " + std::to_string(payload) +
              " payload bytes but holds " + std::to_string(bytes.size() - kHeaderSize));
  }
  if (bytes.size() - kHeaderSize != payload) {
    raise(ErrorCode::TruncatedFile, path.string() + " carries trailing bytes");
  }

  pack.extent = ImageExtent{static_cast<int>(width), static_cast<int>(height)};
  const char* at = bytes.data() + kHeaderSize;
  const std::size_t count = static_cast<std::size_t>(pixels);
  const auto take = [&](std::uint32_t bit) {
    std::vector<float> plane;
    if (pack.mask & bit) {
      plane = load_plane(at, count);
      at += count * sizeof(float);
    }
    return plane;
  };
  pack.flow_u = take(kPlaneFlowU);
  pack.flow_v = take(kPlaneFlowV);
  pack.variance = take(kPlaneVariance);
  pack.occlusion = take(kPlaneOcclusion);
  pack.certainty = take(kPlaneCertainty);
  return pack;
}

void write_flowpack(const FlowPack& pack, const std::filesystem::path& path) {
  validate_mask(pack.mask);
  if (!pack.extent.valid()) {
    raise(ErrorCode::BadConfig, "flow pack extent must be at least 1x1");
  }
  const std::size_t pixels = pack.extent.pixel_count();
  check_plane_size(pack.flow_u, pack.mask & kPlaneFlowU, pixels, "flow-u");
  check_plane_size(pack.flow_v, pack.mask & kPlaneFlowV, pixels, "flow-v");
  check_plane_size(pack.variance, pack.mask & kPlaneVariance, pixels, "variance");
  check_plane_size(pack.occlusion, pack.mask & kPlaneOcclusion, pixels, "occlusion");
  check_plane_size(pack.certainty, pack.mask & kPlaneCertainty, pixels, "certainty");

  std::string bytes;
  bytes.reserve(20 + pixels * 4 * static_cast<std::size_t>(std::popcount(pack.mask)));
  bytes.append(kFlowPackMagic, sizeof kFlowPackMagic);
  append_u32(bytes, static_cast<std::uint32_t>(pack.extent.width));
  append_u32(bytes, static_cast<std::uint32_t>(pack.extent.height));
  append_u32(bytes, pack.mask);
  if (pack.mask & kPlaneFlowU) append_plane(bytes, pack.flow_u);
  if (pack.mask & kPlaneFlowV) append_plane(bytes, pack.flow_v);
  if (pack.mask & kPlaneVariance) append_plane(bytes, pack.variance);
  if (pack.mask & kPlaneOcclusion) append_plane(bytes, pack.occlusion);
  if (pack.mask & kPlaneCertainty) append_plane(bytes, pack.certainty);
  atomic_write_bytes(path, bytes);
}

FlowPack pack_from_bundle(const FlowBundle& bundle) {
  FlowPack pack;
  pack.extent = bundle.extent();
  pack.mask = kPlaneFlowU | kPlaneFlowV | kPlaneVariance | kPlaneOcclusion;
  pack.flow_u.assign(bundle.flow.u().begin(), bundle.flow.u().end());
  pack.flow_v.assign(bundle.flow.v().begin(), bundle.flow.v().end());
  pack.variance.assign(bundle.variance.values().begin(), bundle.variance.values().end());
  pack.occlusion.assign(bundle.occlusion.values().begin(), bundle.occlusion.values().end());
  return pack;
}

FlowBundle bundle_from_pack(const FlowPack& pack) {
  constexpr std::uint32_t needed = kPlaneFlowU | kPlaneFlowV | kPlaneVariance | kPlaneOcclusion;
  if ((pack.mask & needed) != needed) {
    raise(ErrorCode::MaskMismatch, "pack lacks flow, variance or occlusion planes");
  }
  return FlowBundle(FlowField(pack.extent, pack.flow_u, pack.flow_v),
                    ScalarField(pack.extent, FieldRole::Variance, pack.variance),
                    ScalarField(pack.extent, FieldRole::Occlusion, pack.occlusion));
}

FlowField read_flo(const std::filesystem::path& path) {
  const std::string bytes = read_all_bytes(path);
  if (bytes.size() < 4) {
    raise(ErrorCode::TruncatedFile, path.string() + " is shorter than the magic");
  }
  float magic;
  std::memcpy(&magic, bytes.data(), sizeof magic);
  if (magic != kFloMagic) {
    raise(ErrorCode::BadMagic, path.string() + " is not a Middlebury flow file");
  }
  if (bytes.size() < 12) {
    raise(ErrorCode::TruncatedFile, path.string() + " ends inside the header");
  }
  const std::int32_t width = load_i32(bytes.data() + 4);
  const std::int32_t height = load_i32(bytes.data() + 8);
  if (width < 1 || height < 1 || static_cast<std::uint64_t>(width) * height * 8 > kMaxPayloadBytes) {
    raise(ErrorCode::TruncatedFile, path.string() + " declares an invalid extent");
  }
  const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() != 12 + pixels * 8) {
    raise(ErrorCode::TruncatedFile, path.string() + " payload size mismatch");
  }
  std::vector<float> u(pixels), v(pixels);
  const char* at = bytes.data() + 12;
  for (std::size_t p = 0; p < pixels; ++p) {
    std::memcpy(&u[p], at + p * 8, 4);
    std::memcpy(&v[p], at + p * 8 + 4, 4);
  }
  return FlowField(ImageExtent{width, height}, std::move(u), std::move(v));
}

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
  std::string bytes;
  const std::size_t pixels = flow.extent().pixel_count();
  bytes.reserve(12 + pixels * 8);
  append_f32(bytes, kFloMagic);
  append_i32(bytes, flow.extent().width);
  append_i32(bytes, flow.extent().height);
  for (std::size_t p = 0; p < pixels; ++p) {
    append_f32(bytes, flow.u()[p]);
    append_f32(bytes, flow.v()[p]);
  }
  atomic_write_bytes(path, bytes);
}

std::string pair_file_stem(int source_frame, int target_frame) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "flow_%05d_%05d", source_frame, target_frame);
  return buffer;
}

FileProvider::FileProvider(std::filesystem::path directory, int frame_count,
                           ProviderKind kind, AdapterConfig adapter)
    : directory_(std::move(directory)),
      frame_count_(frame_count),
      kind_(kind),
      adapter_(adapter) {
  if (frame_count_ < 1) {
    raise(ErrorCode::BadConfig, "file provider needs at least one frame");
  }
  if (kind_ == ProviderKind::Oracle) {
    raise(ErrorCode::BadConfig, "file provider kind must be flow or matcher");
  }
  if (!std::filesystem::is_directory(directory_)) {
    raise(ErrorCode::IoError, directory_.string() + " is not a directory");
  }
  // Establish the sequence extent from the lexicographically first pair file.
  std::set<std::filesystem::path> candidates;
  for (const auto& entry : std::filesystem::directory_iterator(directory_)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("flow_") &&
        (name.ends_with(".mftflow") || name.ends_with(".flo"))) {
      candidates.insert(entry.path());
    }
  }
  if (candidates.empty()) {
    raise(ErrorCode::MissingPair, "no flow files in " + directory_.string());
  }
  const std::filesystem::path& first = *candidates.begin();
  if (first.extension() == ".flo") {
    extent_ = read_flo(first).extent();
  } else {
    extent_ = read_flowpack(first).extent;
  }
}

FlowBundle FileProvider::provide(const FlowRequest& request) const {
  validate_request(request);
  const std::string stem = pair_file_stem(request.source_frame, request.target_frame);
  const std::filesystem::path pack_path = directory_ / (stem + ".mftflow");
  const std::filesystem::path flo_path = directory_ / (stem + ".flo");

  const bool have_flo = std::filesystem::exists(flo_path);
  if (!have_flo && !std::filesystem::exists(pack_path)) {
    raise(ErrorCode::MissingPair, "no flow file for pair (" +
                                      std::to_string(request.source_frame) + ", " +
                                      std::to_string(request.target_frame) + ") in " +
                                      directory_.string());
  }

  FlowPack pack;
  std::optional<FlowField> flow;
  if (have_flo) {
    flow = read_flo(flo_path);
    if (!(flow->extent() == extent_)) {
      raise(ErrorCode::ExtentMismatch, flo_path.string() + " extent differs from sequence");
    }
    if (!std::filesystem::exists(pack_path)) {
      raise(ErrorCode::MissingPair,
            flo_path.string() + " has no scalar sidecar " + pack_path.filename().string());
    }
    pack = read_flowpack(pack_path);  // scalar sidecar
    if (pack.mask & kPlaneFlowU) {
      raise(ErrorCode::MaskMismatch,
            pack_path.string() + " sidecar must not duplicate the flow planes");
    }
  } else {
    pack = read_flowpack(pack_path);
    if (!(pack.mask & kPlaneFlowU)) {
      raise(ErrorCode::MaskMismatch, pack_path.string() + " lacks flow planes");
    }
    flow = FlowField(pack.extent, std::move(pack.flow_u), std::move(pack.flow_v));
  }
  if (!(pack.extent == extent_)) {
    raise(ErrorCode::ExtentMismatch, pack_path.string() + " extent differs from sequence");
  }

  if (kind_ == ProviderKind::WideBaselineMatcher) {
    if (!(pack.mask & kPlaneCertainty)) {
      raise(ErrorCode::MaskMismatch,
            pack_path.string() + " lacks the certainty plane a matcher backend needs");
    }
    ScalarField certainty(pack.extent, FieldRole::Certainty, std::move(pack.certainty));
    return adapt_matcher_output(std::move(*flow), certainty, adapter_);
  }

  if (!(pack.mask & kPlaneVariance) || !(pack.mask & kPlaneOcclusion)) {
    raise(ErrorCode::MaskMismatch,
          pack_path.string() + " lacks the variance/occlusion planes a flow backend needs");
  }
  return FlowBundle(std::move(*flow),
                    ScalarField(pack.extent, FieldRole::Variance, std::move(pack.variance)),
                    ScalarField(pack.extent, FieldRole::Occlusion, std::move(pack.occlusion)));
}

void emit_provider_directory(const FlowProvider& provider,
                             const std::vector<FlowRequest>& pairs,
                             const std::filesystem::path& directory,
                             ProviderFileFormat format) {
  std::filesystem::create_directories(directory);
  for (const FlowRequest& request : pairs) {
    const FlowBundle bundle = provider.provide(request);
    const std::string stem = pair_file_stem(request.source_frame, request.target_frame);
    if (format == ProviderFileFormat::FlowPack) {
      write_flowpack(pack_from_bundle(bundle), directory / (stem + ".mftflow"));
    } else {
      write_flo(bundle.flow, directory / (stem + ".flo"));
      FlowPack sidecar;
      sidecar.extent = bundle.extent();
      sidecar.mask = kPlaneVariance | kPlaneOcclusion;
      sidecar.variance.assign(bundle.variance.values().begin(), bundle.variance.values().end());
      sidecar.occlusion.assign(bundle.occlusion.values().begin(),
                               bundle.occlusion.values().end());
      write_flowpack(sidecar, directory / (stem + ".mftflow"));
    }
  }
}

std::vector<FlowRequest> schedule_pairs(int frame_count, int max_candidates,
                                        ScheduleMode mode) {
  std::set<std::pair<int, int>> pairs;
  for (int j = 2; j <= frame_count; ++j) {
    switch (mode) {
      case ScheduleMode::Mft:
        for (int delta : delta_schedule(j, max_candidates)) pairs.insert({j - delta, j});
        break;
      case ScheduleMode::ConsecutiveOnly:
        pairs.insert({j - 1, j});
        break;
      case ScheduleMode::DirectOnly:
        pairs.insert({1, j});
        break;
    }
  }
  std::vector<FlowRequest> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) out.push_back(FlowRequest{i, j});
  return out;
}

std::vector<FlowRequest> all_pairs(int frame_count) {
  std::vector<FlowRequest> out;
  for (int i = 1; i < frame_count; ++i) {
    for (int j = i + 1; j <= frame_count; ++j) out.push_back(FlowRequest{i, j});
  }
  return out;
}

}  // namespace mft
