#include "neurite/rasterize.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace neurite {

namespace {

// Paints all voxels whose center lies within radius_um of center_um.
// The voxel containing the center is always painted so sub-voxel spheres
// leave a mark. Claims outside the grid are clipped silently.
void paint_sphere(LabelVolume& labels, Grid3<std::uint8_t>& overlap, const Vec3d& center_um,
                  double radius_um, std::uint32_t id) {
  const GridDims& dims = labels.dims;
  const double sx = dims.voxel_size[2], sy = dims.voxel_size[1], sz = dims.voxel_size[0];

  auto claim = [&](index_t z, index_t y, index_t x) {
    const index_t v = dims.index(z, y, x);
    const std::uint32_t cur = labels[v];
    if (cur == 0) {
      labels[v] = id;
    } else if (cur != id) {
      labels[v] = std::min(cur, id);
      overlap[v] = 1;
    }
  };

  const index_t cz = static_cast<index_t>(std::llround(center_um[2] / sz));
  const index_t cy = static_cast<index_t>(std::llround(center_um[1] / sy));
  const index_t cx = static_cast<index_t>(std::llround(center_um[0] / sx));
  if (dims.in_bounds(cz, cy, cx)) claim(cz, cy, cx);

  const index_t z0 = std::max<index_t>(0, static_cast<index_t>(std::floor((center_um[2] - radius_um) / sz)));
  const index_t z1 = std::min<index_t>(dims.d - 1, static_cast<index_t>(std::ceil((center_um[2] + radius_um) / sz)));
  const index_t y0 = std::max<index_t>(0, static_cast<index_t>(std::floor((center_um[1] - radius_um) / sy)));
  const index_t y1 = std::min<index_t>(dims.h - 1, static_cast<index_t>(std::ceil((center_um[1] + radius_um) / sy)));
  const index_t x0 = std::max<index_t>(0, static_cast<index_t>(std::floor((center_um[0] - radius_um) / sx)));
  const index_t x1 = std::min<index_t>(dims.w - 1, static_cast<index_t>(std::ceil((center_um[0] + radius_um) / sx)));

  const double r2 = radius_um * radius_um;
  for (index_t z = z0; z <= z1; ++z) {
    const double dz = static_cast<double>(z) * sz - center_um[2];
    for (index_t y = y0; y <= y1; ++y) {
      const double dy = static_cast<double>(y) * sy - center_um[1];
      const double zy2 = dz * dz + dy * dy;
      if (zy2 > r2) continue;
      for (index_t x = x0; x <= x1; ++x) {
        const double dx = static_cast<double>(x) * sx - center_um[0];
        if (zy2 + dx * dx <= r2) claim(z, y, x);
      }
    }
  }
}

}  // namespace

LabelVolume rasterize(const SwcForest& forest, const GridDims& dims, bool per_component_ids,
                      RasterReport* report) {
  if (!dims.valid())
    throw Error(ErrorCode::InvalidConfig, "rasterize: invalid grid dims");

  LabelVolume labels(dims, 0);
  Grid3<std::uint8_t> overlap(dims, 0);
  RasterReport local;
  RasterReport& rep = report ? *report : local;
  rep = RasterReport{};

  if (forest.empty()) {
    rep.empty_forest = true;  // warning-level: all-zero volume
    return labels;
  }

  std::unordered_map<std::int64_t, std::uint32_t> comp_id;
  if (per_component_ids) {
    const auto groups = forest_components(forest);
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::int64_t id : groups[g]) comp_id[id] = static_cast<std::uint32_t>(g + 1);
  }

  const double step_um = 0.5 * dims.voxel_size.minCoeff();
  const double sx = dims.voxel_size[2], sy = dims.voxel_size[1], sz = dims.voxel_size[0];

  for (const SwcNode& n : forest.nodes()) {
    const std::uint32_t id = per_component_ids ? comp_id.at(n.id) : 1u;
    const Vec3d p = n.pos();
    const index_t cz = static_cast<index_t>(std::llround(p[2] / sz));
    const index_t cy = static_cast<index_t>(std::llround(p[1] / sy));
    const index_t cx = static_cast<index_t>(std::llround(p[0] / sx));
    if (!dims.in_bounds(cz, cy, cx)) rep.clipped_nodes.push_back(n.id);

    paint_sphere(labels, overlap, p, n.radius, id);
    if (n.parent == -1) continue;

    const SwcNode& par = forest.node(n.parent);
    const Vec3d q = par.pos();
    const double len = (p - q).norm();
    const index_t steps = std::max<index_t>(1, static_cast<index_t>(std::ceil(len / step_um)));
    for (index_t s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / static_cast<double>(steps);
      paint_sphere(labels, overlap, q + t * (p - q), par.radius + t * (n.radius - par.radius), id);
    }
  }

  for (index_t v = 0; v < dims.nvox(); ++v)
    if (overlap[v]) rep.overlap_voxels.push_back(v);

  // 26-connected clusters of the overlap set (distinct crossing events)
  if (!rep.overlap_voxels.empty()) {
    VoxelMask om(dims, 0);
    for (index_t v : rep.overlap_voxels) om[v] = 1;
    rep.crossing_clusters = static_cast<index_t>(mask_components26(om).second);
  }
  return labels;
}

VoxelMask mask_from_labels(const LabelVolume& labels) {
  VoxelMask mask(labels.dims, 0);
  for (index_t v = 0; v < labels.dims.nvox(); ++v) mask[v] = labels[v] ? 1 : 0;
  return mask;
}

}  // namespace neurite
