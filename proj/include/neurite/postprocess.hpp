#pragma once

#include <cstdint>
#include <vector>

#include "neurite/grid.hpp"
#include "neurite/swc.hpp"

namespace neurite {

struct ReconParams {
  double epsilon = 1.0;      // embedding-distance threshold
  index_t jump_radius = 16;  // Chebyshev radius for cross-segment links; must
                             // cover the bite a crossing fiber leaves behind
                             // (about twice the occluding tube radius)
  index_t min_component_voxels = 5;  // 0 keeps everything

  void validate() const {
    if (!(epsilon > 0.0))
      throw Error(ErrorCode::InvalidConfig, "recon: epsilon must be > 0");
    if (jump_radius < 1)
      throw Error(ErrorCode::InvalidConfig, "recon: jump_radius must be >= 1");
    if (min_component_voxels < 0)
      throw Error(ErrorCode::InvalidConfig, "recon: min_component_voxels must be >= 0");
  }
};

struct SkeletonEdge {
  index_t a = 0;  // linear voxel indices, a < b
  index_t b = 0;
  bool jump = false;
  double embedding_distance = 0.0;  // carried for jump edges
};

// One-voxel-wide curves: the surviving voxels plus their adjacency
// (26-connectivity within segments, flagged jump edges across them).
struct Skeleton {
  GridDims dims;
  std::vector<index_t> voxels;  // ascending
  std::vector<SkeletonEdge> edges;
};

struct ReconReport {
  index_t micro_segments = 0;
  index_t skeleton_voxels = 0;
  index_t jump_edges = 0;
  index_t dropped_cycle_edges = 0;      // non-tree edges removed by BFS
  index_t dropped_components = 0;       // below min_component_voxels
  index_t dropped_component_voxels = 0;
};

// Connected components of foreground voxels under 26-adjacency gated by
// embedding distance <= epsilon. Labels are numbered 1..K by decreasing
// component size, ties by smallest voxel index.
LabelVolume split_by_embedding(const VoxelMask& mask, const Field3<float>& field,
                               double epsilon);

// Builds skeleton adjacency: 26-adjacency within each segment; across
// segments, a link between voxels at Chebyshev distance <= jump_radius with
// embedding distance < epsilon, keeping per voxel only its closest cross
// link (ties by smaller partner index). Jump edges are flagged.
Skeleton reconnect(const LabelVolume& segments, const Field3<float>& field,
                   const ReconParams& params);

// BFS tree extraction: per component, root = maximal distance-transform
// voxel (ties by smallest index); radii from the anisotropic distance
// transform of `mask`; coordinates in micrometers. Non-tree edges are
// dropped (counted), components below min_component_voxels removed.
SwcForest build_forest(const Skeleton& skeleton, const VoxelMask& mask,
                       const ReconParams& params, ReconReport* report = nullptr,
                       int threads = 1);

// split -> per-segment thin -> reconnect -> build_forest
SwcForest reconstruct(const VoxelMask& mask, const Field3<float>& field,
                      const ReconParams& params, ReconReport* report = nullptr,
                      int threads = 1);

// Per-segment thinning: thins each labelled segment inside its bounding box
// and returns the skeletonized micro-segments (same label ids).
LabelVolume thin_segments(const LabelVolume& segments, int threads = 1);

}  // namespace neurite
