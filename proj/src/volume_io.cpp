#include "neurite/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace neurite {

static_assert(std::endian::native == std::endian::little,
              "raw payloads are little-endian; big-endian hosts are unsupported");

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "u8") return 1;
  if (dtype == "u32") return 4;
  if (dtype == "f32") return 4;
  throw Error(ErrorCode::UnsupportedDtype, "volume: unsupported dtype '" + dtype + "'");
}

VolumeHeader parse_header(const std::string& json_path, const json& j) {
  if (!j.is_object() || j.value("schema", "") != "vol1")
    throw Error(ErrorCode::HeaderMismatch, "volume: " + json_path + ": schema is not 'vol1'");
  if (j.value("order", "") != "c_zyx")
    throw Error(ErrorCode::HeaderMismatch, "volume: " + json_path + ": order is not 'c_zyx'");

  VolumeHeader h;
  h.dtype = j.value("dtype", "");
  dtype_size(h.dtype);

  const auto& dims = j.at("dims");
  if (!dims.is_array() || dims.size() != 3)
    throw Error(ErrorCode::HeaderMismatch, "volume: " + json_path + ": dims must be [d,h,w]");
  h.dims.d = dims[0].get<index_t>();
  h.dims.h = dims[1].get<index_t>();
  h.dims.w = dims[2].get<index_t>();

  const auto& vs = j.at("voxel_size");
  if (!vs.is_array() || vs.size() != 3)
    throw Error(ErrorCode::HeaderMismatch,
                "volume: " + json_path + ": voxel_size must be [sz,sy,sx]");
  for (int a = 0; a < 3; ++a) h.dims.voxel_size[a] = vs[a].get<double>();

  h.channels = j.value("channels", index_t{1});
  if (!h.dims.valid() || h.channels < 1)
    throw Error(ErrorCode::HeaderMismatch, "volume: " + json_path + ": invalid dims or channels");

  h.data_path = j.value("data", "");
  if (h.data_path.empty())
    throw Error(ErrorCode::HeaderMismatch, "volume: " + json_path + ": missing data field");
  if (j.contains("provenance")) h.provenance = j["provenance"];
  return h;
}

std::vector<char> read_payload(const std::string& json_path, const VolumeHeader& h) {
  const fs::path payload = fs::path(json_path).parent_path() / h.data_path;
  std::ifstream in(payload, std::ios::binary | std::ios::ate);
  if (!in)
    throw Error(ErrorCode::IoError, "volume: cannot open payload " + payload.string(),
                ErrorKind::Runtime);
  const std::size_t have = static_cast<std::size_t>(in.tellg());
  const std::size_t want =
      dtype_size(h.dtype) * static_cast<std::size_t>(h.channels * h.dims.nvox());
  if (have < want)
    throw Error(ErrorCode::TruncatedPayload,
                "volume: " + payload.string() + ": payload has " + std::to_string(have) +
                    " bytes, header promises " + std::to_string(want));
  if (have > want)
    throw Error(ErrorCode::HeaderMismatch,
                "volume: " + payload.string() + ": payload has " + std::to_string(have) +
                    " bytes, header promises " + std::to_string(want));
  std::vector<char> bytes(want);
  in.seekg(0);
  in.read(bytes.data(), static_cast<std::streamsize>(want));
  if (!in)
    throw Error(ErrorCode::IoError, "volume: short read from " + payload.string(),
                ErrorKind::Runtime);
  return bytes;
}

void write_files(const std::string& json_path, const std::string& dtype,
                 const GridDims& dims, index_t channels, const void* payload,
                 std::size_t payload_bytes, const json& provenance) {
  const fs::path jp(json_path);
  fs::path raw = jp;
  raw.replace_extension(".raw");

  json j;
  j["schema"] = "vol1";
  j["dtype"] = dtype;
  j["dims"] = {dims.d, dims.h, dims.w};
  j["channels"] = channels;
  j["voxel_size"] = {dims.voxel_size[0], dims.voxel_size[1], dims.voxel_size[2]};
  j["order"] = "c_zyx";
  j["data"] = raw.filename().string();
  if (!provenance.is_null()) j["provenance"] = provenance;

  std::ofstream js(jp, std::ios::binary);
  if (!js)
    throw Error(ErrorCode::IoError, "volume: cannot write " + json_path, ErrorKind::Runtime);
  js << j.dump(2) << '\n';

  std::ofstream rs(raw, std::ios::binary);
  if (!rs)
    throw Error(ErrorCode::IoError, "volume: cannot write " + raw.string(), ErrorKind::Runtime);
  rs.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
  if (!rs)
    throw Error(ErrorCode::IoError, "volume: short write to " + raw.string(), ErrorKind::Runtime);
}

}  // namespace

VolumeHeader read_volume_header(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in)
    throw Error(ErrorCode::IoError, "volume: cannot open " + json_path, ErrorKind::Runtime);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::HeaderMismatch, "volume: " + json_path + ": " + e.what());
  }
  return parse_header(json_path, j);
}

std::pair<VolumeHeader, VolumeData> read_volume(const std::string& json_path) {
  VolumeHeader h = read_volume_header(json_path);
  std::vector<char> bytes = read_payload(json_path, h);

  if (h.dtype == "u8") {
    if (h.channels != 1)
      throw Error(ErrorCode::HeaderMismatch, "volume: u8 volumes must have 1 channel");
    VoxelMask m(h.dims);
    std::memcpy(m.data.data(), bytes.data(), bytes.size());
    return {h, std::move(m)};
  }
  if (h.dtype == "u32") {
    if (h.channels != 1)
      throw Error(ErrorCode::HeaderMismatch, "volume: u32 volumes must have 1 channel");
    LabelVolume l(h.dims);
    std::memcpy(l.data.data(), bytes.data(), bytes.size());
    return {h, std::move(l)};
  }
  Field3<float> f(h.dims, h.channels);
  std::memcpy(f.data.data(), bytes.data(), bytes.size());
  for (float v : f.data)
    if (!std::isfinite(v))
      throw Error(ErrorCode::HeaderMismatch, "volume: " + json_path + ": non-finite value");
  return {h, std::move(f)};
}

VoxelMask read_mask(const std::string& json_path) {
  auto [h, v] = read_volume(json_path);
  if (auto* m = std::get_if<VoxelMask>(&v)) return std::move(*m);
  throw Error(ErrorCode::UnsupportedDtype, "volume: " + json_path + ": expected dtype u8 mask");
}

LabelVolume read_labels(const std::string& json_path) {
  auto [h, v] = read_volume(json_path);
  if (auto* l = std::get_if<LabelVolume>(&v)) return std::move(*l);
  throw Error(ErrorCode::UnsupportedDtype, "volume: " + json_path + ": expected dtype u32 labels");
}

Field3<float> read_field(const std::string& json_path) {
  auto [h, v] = read_volume(json_path);
  if (auto* f = std::get_if<Field3<float>>(&v)) return std::move(*f);
  throw Error(ErrorCode::UnsupportedDtype, "volume: " + json_path + ": expected dtype f32 field");
}

void write_volume(const std::string& json_path, const VoxelMask& v,
                  const nlohmann::json& provenance) {
  write_files(json_path, "u8", v.dims, 1, v.data.data(), v.data.size(), provenance);
}

void write_volume(const std::string& json_path, const LabelVolume& v,
                  const nlohmann::json& provenance) {
  write_files(json_path, "u32", v.dims, 1, v.data.data(), v.data.size() * 4, provenance);
}

void write_volume(const std::string& json_path, const Field3<float>& v,
                  const nlohmann::json& provenance) {
  write_files(json_path, "f32", v.dims, v.n, v.data.data(), v.data.size() * 4, provenance);
}

}  // namespace neurite
