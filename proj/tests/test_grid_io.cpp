#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "neurite/rng.hpp"
#include "neurite/volume_io.hpp"

using namespace neurite;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() / ("neurite_io_test_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

GridDims cube(index_t n) {
  GridDims d;
  d.d = d.h = d.w = n;
  d.voxel_size = Vec3d(1.0, 0.35, 0.35);  // fMOST-style anisotropy
  return d;
}

}  // namespace

TEST_CASE("neighbors26: interior, corner, face counts") {
  const GridDims dims = cube(5);
  CHECK(neighbors26(dims, dims.index(2, 2, 2)).size() == 26);
  CHECK(neighbors26(dims, dims.index(0, 0, 0)).size() == 7);
  // face voxel (one coordinate on the boundary): 26 offsets minus the 9
  // pointing out of the volume = 17
  CHECK(neighbors26(dims, dims.index(0, 2, 2)).size() == 17);
}

TEST_CASE("neighbors26: symmetry") {
  const GridDims dims = cube(4);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const index_t v = rng.uniform_int(0, dims.nvox() - 1);
    for (index_t u : neighbors26(dims, v)) {
      const auto back = neighbors26(dims, u);
      CHECK(std::find(back.begin(), back.end(), v) != back.end());
    }
  }
}

TEST_CASE("volume io: u8 mask round trip is bit exact") {
  const fs::path dir = temp_dir();
  VoxelMask m(cube(4), 0);
  Rng rng(9);
  for (index_t v = 0; v < m.dims.nvox(); ++v) m[v] = rng.uniform() < 0.5 ? 1 : 0;

  const std::string path = (dir / "mask.json").string();
  write_volume(path, m);
  const VoxelMask back = read_mask(path);
  CHECK(back.dims.same_extents(m.dims));
  CHECK(back.dims.voxel_size == m.dims.voxel_size);
  CHECK(back.data == m.data);
}

TEST_CASE("volume io: u32 labels round trip") {
  const fs::path dir = temp_dir();
  LabelVolume l(cube(6), 0);
  Rng rng(10);
  for (index_t v = 0; v < l.dims.nvox(); ++v)
    l[v] = static_cast<std::uint32_t>(rng.uniform_int(0, 1 << 20));
  const std::string path = (dir / "labels.json").string();
  write_volume(path, l);
  CHECK(read_labels(path).data == l.data);
}

TEST_CASE("volume io: f32 field round trip keeps every bit") {
  const fs::path dir = temp_dir();
  Field3<float> f(cube(16), 8);
  Rng rng(11);
  for (auto& v : f.data) v = static_cast<float>(rng.uniform(-1000.0, 1000.0));
  const std::string path = (dir / "field.json").string();
  write_volume(path, f);
  const Field3<float> back = read_field(path);
  CHECK(back.n == 8);
  CHECK(back.data == f.data);
}

TEST_CASE("volume io: truncated payload is reported") {
  const fs::path dir = temp_dir();
  VoxelMask m(cube(4), 1);
  const std::string path = (dir / "short.json").string();
  write_volume(path, m);
  fs::resize_file(dir / "short.raw", 10);
  try {
    read_mask(path);
    FAIL("expected TruncatedPayload");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncatedPayload);
  }
}

TEST_CASE("volume io: oversized payload and bad headers") {
  const fs::path dir = temp_dir();
  VoxelMask m(cube(4), 1);
  const std::string path = (dir / "long.json").string();
  write_volume(path, m);
  {
    std::ofstream app(dir / "long.raw", std::ios::binary | std::ios::app);
    app << "extra";
  }
  try {
    read_mask(path);
    FAIL("expected HeaderMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HeaderMismatch);
  }

  const std::string bad = (dir / "bad.json").string();
  {
    std::ofstream out(bad);
    out << R"({"schema":"vol1","dtype":"f64","dims":[2,2,2],"channels":1,)"
        << R"("voxel_size":[1,1,1],"order":"c_zyx","data":"bad.raw"})";
  }
  try {
    read_volume_header(bad);
    FAIL("expected UnsupportedDtype");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedDtype);
  }
}
