#pragma once

#include <cstdint>

#include "neurite/grid.hpp"
#include "neurite/rasterize.hpp"
#include "neurite/swc.hpp"

namespace neurite {

struct PhantomSpec {
  GridDims dims;  // defaults set by default_phantom_dims()
  index_t n_tubes = 3;
  double radius_min_um = 2.0;
  double radius_max_um = 3.0;
  double curvature_um = 6.0;       // waypoint jitter amplitude
  index_t crossing_target = 1;     // minimum number of crossing sites
  double noise_sigma = 0.0;        // embedding noise scale (oracle input)
  index_t embed_dim = 8;
  double separation = 3.0;         // pairwise embedding distance floor
  std::uint64_t seed = 1;

  void validate() const {
    if (dims.d < 16 || dims.h < 16 || dims.w < 16 || !dims.valid())
      throw Error(ErrorCode::InvalidConfig, "phantom: dims must be at least 16^3");
    if (n_tubes < 1)
      throw Error(ErrorCode::InvalidConfig, "phantom: n_tubes must be >= 1");
    if (!(radius_min_um > 0.0) || radius_max_um < radius_min_um)
      throw Error(ErrorCode::InvalidConfig, "phantom: invalid radius range");
    if (curvature_um < 0.0 || crossing_target < 0 || noise_sigma < 0.0)
      throw Error(ErrorCode::InvalidConfig, "phantom: negative parameter");
    if (embed_dim < 2 || !(separation > 0.0))
      throw Error(ErrorCode::InvalidConfig, "phantom: embed_dim >= 2 and separation > 0 required");
  }
};

GridDims default_phantom_dims();

struct PhantomResult {
  SwcForest gt;
  LabelVolume labels;
  VoxelMask mask;
  RasterReport raster;
  index_t crossing_clusters = 0;  // 26-connected overlap clusters
  bool placement_failure = false;  // crossing target not met (best effort kept)
};

// Seeded tube phantom: smooth random-waypoint centerlines rasterized with
// per-tube instance ids. Deterministic for a fixed seed.
PhantomResult gen_phantom(const PhantomSpec& spec);

// Per-instance embedding vectors with pairwise distances >= separation
// (scaled orthogonal placement, then seeded rejection sampling), plus
// isotropic Gaussian noise; background voxels get noise around zero.
Field3<float> oracle_embedding(const LabelVolume& labels, index_t n, double separation,
                               double noise_sigma, std::uint64_t seed);

}  // namespace neurite
