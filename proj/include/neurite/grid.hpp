#pragma once

#include <cstdint>
#include <vector>

#include "neurite/error.hpp"
#include "neurite/types.hpp"

namespace neurite {

// Voxel grid extents plus physical voxel size in micrometers.
// Storage is C-order with z slowest and x fastest.
struct GridDims {
  index_t d = 0;  // z extent
  index_t h = 0;  // y extent
  index_t w = 0;  // x extent
  Vec3d voxel_size = Vec3d::Ones();  // (sz, sy, sx) um/voxel

  index_t nvox() const { return d * h * w; }

  bool valid() const {
    return d >= 1 && h >= 1 && w >= 1 && (voxel_size.array() > 0.0).all();
  }

  index_t index(index_t z, index_t y, index_t x) const {
    return (z * h + y) * w + x;
  }

  void unindex(index_t i, index_t& z, index_t& y, index_t& x) const {
    x = i % w;
    y = (i / w) % h;
    z = i / (w * h);
  }

  bool in_bounds(index_t z, index_t y, index_t x) const {
    return z >= 0 && z < d && y >= 0 && y < h && x >= 0 && x < w;
  }

  // voxel center in micrometers, (x, y, z) order
  Vec3d voxel_to_um(index_t z, index_t y, index_t x) const {
    return Vec3d(static_cast<double>(x) * voxel_size[2],
                 static_cast<double>(y) * voxel_size[1],
                 static_cast<double>(z) * voxel_size[0]);
  }

  bool same_extents(const GridDims& o) const {
    return d == o.d && h == o.h && w == o.w;
  }
};

// Dense scalar volume.
template <class T>
struct Grid3 {
  GridDims dims;
  std::vector<T> data;

  Grid3() = default;
  explicit Grid3(const GridDims& dm, T fill = T{})
      : dims(dm), data(static_cast<std::size_t>(dm.nvox()), fill) {}

  T& operator[](index_t i) { return data[static_cast<std::size_t>(i)]; }
  const T& operator[](index_t i) const { return data[static_cast<std::size_t>(i)]; }

  T& at(index_t z, index_t y, index_t x) { return (*this)[dims.index(z, y, x)]; }
  const T& at(index_t z, index_t y, index_t x) const { return (*this)[dims.index(z, y, x)]; }
};

using VoxelMask = Grid3<std::uint8_t>;
using LabelVolume = Grid3<std::uint32_t>;

// n real channels per voxel, channel-major (channel slowest, then C-order
// voxels). Scalar type is a template parameter: files hold f32, numerical
// work (gradient checks) instantiates double.
template <class T>
struct Field3 {
  GridDims dims;
  index_t n = 0;
  std::vector<T> data;

  Field3() = default;
  Field3(const GridDims& dm, index_t channels, T fill = T{})
      : dims(dm),
        n(channels),
        data(static_cast<std::size_t>(dm.nvox() * channels), fill) {}

  T& at(index_t channel, index_t voxel) {
    return data[static_cast<std::size_t>(channel * dims.nvox() + voxel)];
  }
  const T& at(index_t channel, index_t voxel) const {
    return data[static_cast<std::size_t>(channel * dims.nvox() + voxel)];
  }

  using MapType = Eigen::Map<VecX<T>, 0, Eigen::InnerStride<Eigen::Dynamic>>;
  using ConstMapType = Eigen::Map<const VecX<T>, 0, Eigen::InnerStride<Eigen::Dynamic>>;

  // embedding vector of one voxel (strided view across channel planes)
  MapType embedding(index_t voxel) {
    return MapType(data.data() + voxel, n, Eigen::InnerStride<Eigen::Dynamic>(dims.nvox()));
  }
  ConstMapType embedding(index_t voxel) const {
    return ConstMapType(data.data() + voxel, n, Eigen::InnerStride<Eigen::Dynamic>(dims.nvox()));
  }
};

// The 26 face/edge/corner offsets in fixed (dz, dy, dx) lexicographic order.
// Index order is the tie-break order everywhere a neighborhood is scanned.
inline constexpr int kNeighborOffsets26[26][3] = {
    {-1, -1, -1}, {-1, -1, 0}, {-1, -1, 1}, {-1, 0, -1}, {-1, 0, 0},
    {-1, 0, 1},   {-1, 1, -1}, {-1, 1, 0},  {-1, 1, 1},  {0, -1, -1},
    {0, -1, 0},   {0, -1, 1},  {0, 0, -1},  {0, 0, 1},   {0, 1, -1},
    {0, 1, 0},    {0, 1, 1},   {1, -1, -1}, {1, -1, 0},  {1, -1, 1},
    {1, 0, -1},   {1, 0, 0},   {1, 0, 1},   {1, 1, -1},  {1, 1, 0},
    {1, 1, 1}};

// In-bounds 26-neighbors of a voxel, in kNeighborOffsets26 order.
std::vector<index_t> neighbors26(const GridDims& dims, index_t voxel);

// Box spanned by the voxel centers, in micrometers.
Box3 volume_box_um(const GridDims& dims);

// 26-connected components of a mask; returns one label per voxel
// (0 = background, components numbered 1..K by smallest voxel index)
// plus the component count.
std::pair<Grid3<std::uint32_t>, std::uint32_t> mask_components26(const VoxelMask& mask);

}  // namespace neurite
