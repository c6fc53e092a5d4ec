#pragma once

#include "neurite/grid.hpp"
#include "neurite/swc.hpp"

namespace neurite {

struct RasterReport {
  std::vector<index_t> overlap_voxels;       // claimed by >= 2 components, sorted
  std::vector<std::int64_t> clipped_nodes;   // node ids whose center lies outside
  index_t crossing_clusters = 0;             // 26-connected clusters of overlap voxels
  bool empty_forest = false;
};

// Sweeps every (node, parent) edge with spheres of linearly interpolated
// radius at <= 0.5-voxel steps; label = component id (1..K in order of first
// node appearance) or 1 everywhere when per_component_ids is false.
// Overlaps resolve to the lower component id and are reported.
LabelVolume rasterize(const SwcForest& forest, const GridDims& dims, bool per_component_ids,
                      RasterReport* report = nullptr);

VoxelMask mask_from_labels(const LabelVolume& labels);

}  // namespace neurite
