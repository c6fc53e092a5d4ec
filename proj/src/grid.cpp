#include "neurite/grid.hpp"

#include <utility>

namespace neurite {

std::vector<index_t> neighbors26(const GridDims& dims, index_t voxel) {
  index_t z, y, x;
  dims.unindex(voxel, z, y, x);
  std::vector<index_t> out;
  out.reserve(26);
  for (const auto& o : kNeighborOffsets26) {
    const index_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
    if (dims.in_bounds(nz, ny, nx)) out.push_back(dims.index(nz, ny, nx));
  }
  return out;
}

Box3 volume_box_um(const GridDims& dims) {
  Box3 b;
  b.lo = Vec3d::Zero();
  b.hi = Vec3d(static_cast<double>(dims.w - 1) * dims.voxel_size[2],
               static_cast<double>(dims.h - 1) * dims.voxel_size[1],
               static_cast<double>(dims.d - 1) * dims.voxel_size[0]);
  return b;
}

std::pair<Grid3<std::uint32_t>, std::uint32_t> mask_components26(const VoxelMask& mask) {
  Grid3<std::uint32_t> labels(mask.dims, 0);
  std::uint32_t next = 0;
  std::vector<index_t> stack;
  const index_t n = mask.dims.nvox();

  for (index_t seed = 0; seed < n; ++seed) {
    if (!mask[seed] || labels[seed]) continue;
    ++next;
    labels[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const index_t v = stack.back();
      stack.pop_back();
      index_t z, y, x;
      mask.dims.unindex(v, z, y, x);
      for (const auto& o : kNeighborOffsets26) {
        const index_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
        if (!mask.dims.in_bounds(nz, ny, nx)) continue;
        const index_t u = mask.dims.index(nz, ny, nx);
        if (mask[u] && !labels[u]) {
          labels[u] = next;
          stack.push_back(u);
        }
      }
    }
  }
  return {std::move(labels), next};
}

}  // namespace neurite
