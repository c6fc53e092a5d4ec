#pragma once

#include <string>
#include <variant>

#include "json.hpp"
#include "neurite/grid.hpp"

namespace neurite {

// Volume file = JSON sidecar + raw little-endian payload.
// Sidecar: {schema:"vol1", dtype:"u8"|"u32"|"f32", dims:[d,h,w], channels:n,
//           voxel_size:[sz,sy,sx], order:"c_zyx", data:"<payload file>"}
// The payload lives next to the sidecar; fields are channel-major.

struct VolumeHeader {
  std::string dtype;
  GridDims dims;
  index_t channels = 1;
  std::string data_path;  // as recorded in the sidecar (relative)
  nlohmann::json provenance;  // null when absent
};

using VolumeData = std::variant<VoxelMask, LabelVolume, Field3<float>>;

VolumeHeader read_volume_header(const std::string& json_path);
std::pair<VolumeHeader, VolumeData> read_volume(const std::string& json_path);

// Typed readers; throw UnsupportedDtype when the file holds something else.
VoxelMask read_mask(const std::string& json_path);
LabelVolume read_labels(const std::string& json_path);
Field3<float> read_field(const std::string& json_path);

void write_volume(const std::string& json_path, const VoxelMask& v,
                  const nlohmann::json& provenance = nullptr);
void write_volume(const std::string& json_path, const LabelVolume& v,
                  const nlohmann::json& provenance = nullptr);
void write_volume(const std::string& json_path, const Field3<float>& v,
                  const nlohmann::json& provenance = nullptr);

}  // namespace neurite
