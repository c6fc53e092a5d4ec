#include "neurite/loss.hpp"

namespace neurite {

std::vector<PatchSpec> find_overlap_patches(const LabelVolume& labels, Vec3i patch_size,
                                            Vec3i stride) {
  for (int a = 0; a < 3; ++a) {
    if (patch_size[a] < 1 || stride[a] < 1)
      throw Error(ErrorCode::InvalidConfig, "find_overlap_patches: patch and stride must be >= 1");
  }
  const GridDims& dims = labels.dims;
  if (patch_size[0] > dims.d || patch_size[1] > dims.h || patch_size[2] > dims.w)
    return {};

  std::vector<PatchSpec> out;
  std::vector<std::uint32_t> seen;
  for (index_t z = 0; z + patch_size[0] <= dims.d; z += stride[0])
    for (index_t y = 0; y + patch_size[1] <= dims.h; y += stride[1])
      for (index_t x = 0; x + patch_size[2] <= dims.w; x += stride[2]) {
        seen.clear();
        bool keep = false;
        for (index_t zz = z; zz < z + patch_size[0] && !keep; ++zz)
          for (index_t yy = y; yy < y + patch_size[1] && !keep; ++yy) {
            const index_t row = dims.index(zz, yy, x);
            for (index_t xx = 0; xx < patch_size[2]; ++xx) {
              const std::uint32_t id = labels[row + xx];
              if (id == 0) continue;
              if (std::find(seen.begin(), seen.end(), id) == seen.end()) {
                seen.push_back(id);
                if (seen.size() >= 2) {
                  keep = true;
                  break;
                }
              }
            }
          }
        if (keep) {
          PatchSpec p;
          p.origin = Vec3i(z, y, x);
          p.size = patch_size;
          out.push_back(p);
        }
      }
  return out;
}

double distance_term(const std::vector<InstanceCluster>& clusters, const Margins& margins) {
  margins.validate();
  const std::size_t k = clusters.size();
  if (k < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      const double d = (clusters[a].centroid - clusters[b].centroid).norm();
      const double h = std::max(0.0, 2.0 * margins.delta_d - d);
      acc += 2.0 * h * h;  // ordered pairs
    }
  return acc / (static_cast<double>(k) * static_cast<double>(k - 1));
}

}  // namespace neurite
