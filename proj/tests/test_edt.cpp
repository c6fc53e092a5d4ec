#include <cmath>

#include "doctest.h"
#include "neurite/edt.hpp"
#include "neurite/rng.hpp"

using namespace neurite;

namespace {

// brute force over all background voxels
Grid3<float> naive_edt(const VoxelMask& mask) {
  const GridDims& dims = mask.dims;
  Grid3<float> out(dims, 0.0f);
  const double sx = dims.voxel_size[2], sy = dims.voxel_size[1], sz = dims.voxel_size[0];
  const double diag = std::sqrt(std::pow(dims.w * sx, 2) + std::pow(dims.h * sy, 2) +
                                std::pow(dims.d * sz, 2));
  for (index_t z = 0; z < dims.d; ++z)
    for (index_t y = 0; y < dims.h; ++y)
      for (index_t x = 0; x < dims.w; ++x) {
        if (!mask.at(z, y, x)) continue;
        double best = diag * diag;
        bool found = false;
        for (index_t bz = 0; bz < dims.d; ++bz)
          for (index_t by = 0; by < dims.h; ++by)
            for (index_t bx = 0; bx < dims.w; ++bx) {
              if (mask.at(bz, by, bx)) continue;
              const double dz = (z - bz) * sz, dy = (y - by) * sy, dx = (x - bx) * sx;
              const double d2 = dz * dz + dy * dy + dx * dx;
              if (d2 < best) best = d2;
              found = true;
            }
        out.at(z, y, x) = static_cast<float>(found ? std::sqrt(best) : diag);
      }
  return out;
}

}  // namespace

TEST_CASE("edt: matches brute force on random anisotropic masks") {
  GridDims dims;
  dims.d = 7;
  dims.h = 8;
  dims.w = 9;
  dims.voxel_size = Vec3d(1.0, 0.35, 0.35);
  Rng rng(64);
  for (int trial = 0; trial < 5; ++trial) {
    VoxelMask m(dims, 0);
    for (index_t v = 0; v < dims.nvox(); ++v) m[v] = rng.uniform() < 0.7;
    const Grid3<float> fast = distance_transform_um(m);
    const Grid3<float> slow = naive_edt(m);
    for (index_t v = 0; v < dims.nvox(); ++v) {
      if (!m[v]) {
        CHECK(fast[v] == 0.0f);
        continue;
      }
      CHECK(std::abs(fast[v] - slow[v]) <= 1e-4f * std::max(1.0f, slow[v]));
    }
  }
}

TEST_CASE("edt: background is zero, solid volume clamps to the diagonal") {
  GridDims dims;
  dims.d = dims.h = dims.w = 5;
  dims.voxel_size = Vec3d::Ones();
  const VoxelMask empty(dims, 0);
  const Grid3<float> ez = distance_transform_um(empty);
  for (index_t v = 0; v < dims.nvox(); ++v) CHECK(ez[v] == 0.0f);

  const VoxelMask solid(dims, 1);
  const Grid3<float> sd = distance_transform_um(solid);
  const float diag = static_cast<float>(std::sqrt(75.0));
  for (index_t v = 0; v < dims.nvox(); ++v) CHECK(sd[v] == doctest::Approx(diag));
}

TEST_CASE("edt: centerline of a slab reads the half thickness") {
  GridDims dims;
  dims.d = 9;
  dims.h = 9;
  dims.w = 9;
  dims.voxel_size = Vec3d::Ones();
  VoxelMask slab(dims, 0);
  for (index_t z = 2; z <= 6; ++z)
    for (index_t y = 0; y < 9; ++y)
      for (index_t x = 0; x < 9; ++x) slab.at(z, y, x) = 1;
  const Grid3<float> dt = distance_transform_um(slab);
  CHECK(dt.at(4, 4, 4) == doctest::Approx(3.0));  // to the nearest zero plane
  CHECK(dt.at(2, 4, 4) == doctest::Approx(1.0));
}
