#pragma once

#include "neurite/grid.hpp"

namespace neurite {

// Exact anisotropic Euclidean distance transform: per foreground voxel, the
// distance in micrometers to the nearest background voxel center (separable
// lower-envelope passes over squared distances). Background voxels get 0.
// Voxels outside the grid do not count as background, so structures clipped
// by the volume border keep their interior distance. A volume without any
// background gets the grid diagonal.
Grid3<float> distance_transform_um(const VoxelMask& mask, int threads = 1);

}  // namespace neurite
