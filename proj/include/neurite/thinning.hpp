#pragma once

#include "neurite/grid.hpp"

namespace neurite {

// 6-subiteration parallel curve thinning on the (26, 6) digital grid.
// Each pass marks, direction by direction (U, D, N, S, E, W), the border
// points whose deletion keeps the object's 26-connectivity and the
// background's 6-connectivity (simple points) and which are not line
// endpoints; marked points are then deleted in fixed voxel order with a
// re-check, so every single removal is topology preserving. Runs to a fixed
// point: the result is idempotent, a subset of the input, and preserves
// component count, tunnels and cavities.
VoxelMask thin(const VoxelMask& mask);

// True when the voxel configuration around `voxel` makes it simple, i.e.
// deletable without changing the topology of object or background.
bool is_simple_point(const VoxelMask& mask, index_t voxel);

}  // namespace neurite
