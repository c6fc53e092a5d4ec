#include "neurite/edt.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "neurite/parallel.hpp"

namespace neurite {

namespace {

constexpr double kFar = 1e30;  // stand-in for +inf that keeps the envelope
                               // intersection arithmetic finite; the z
                               // sentinels stay true infinities so no finite
                               // intersection can breach them

// 1D squared-distance transform over samples at positions i*spacing
// (Felzenszwalb-Huttenlocher lower envelope). f and out may not alias.
void dt1d(const double* f, double* out, index_t n, double spacing,
          std::vector<index_t>& v, std::vector<double>& z) {
  const double inf = std::numeric_limits<double>::infinity();
  v.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n) + 1);
  index_t k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (index_t q = 1; q < n; ++q) {
    const double xq = static_cast<double>(q) * spacing;
    double s;
    for (;;) {
      const double xv = static_cast<double>(v[static_cast<std::size_t>(k)]) * spacing;
      s = ((f[q] + xq * xq) - (f[v[static_cast<std::size_t>(k)]] + xv * xv)) /
          (2.0 * xq - 2.0 * xv);
      if (s > z[static_cast<std::size_t>(k)]) break;
      --k;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = inf;
  }
  k = 0;
  for (index_t q = 0; q < n; ++q) {
    const double xq = static_cast<double>(q) * spacing;
    while (z[static_cast<std::size_t>(k) + 1] < xq) ++k;
    const double xv = static_cast<double>(v[static_cast<std::size_t>(k)]) * spacing;
    out[q] = (xq - xv) * (xq - xv) + f[v[static_cast<std::size_t>(k)]];
  }
}

}  // namespace

Grid3<float> distance_transform_um(const VoxelMask& mask, int threads) {
  const GridDims& dims = mask.dims;
  const index_t nvox = dims.nvox();
  std::vector<double> sq(static_cast<std::size_t>(nvox));
  for (index_t i = 0; i < nvox; ++i) sq[static_cast<std::size_t>(i)] = mask[i] ? kFar : 0.0;

  const double sx = dims.voxel_size[2], sy = dims.voxel_size[1], sz = dims.voxel_size[0];

  // x pass: rows are contiguous
  parallel_for(dims.d * dims.h, threads, [&](index_t row) {
    std::vector<index_t> v;
    std::vector<double> z;
    std::vector<double> line(static_cast<std::size_t>(dims.w));
    double* base = sq.data() + row * dims.w;
    std::copy(base, base + dims.w, line.data());
    dt1d(line.data(), base, dims.w, sx, v, z);
  });

  // y pass
  parallel_for(dims.d * dims.w, threads, [&](index_t i) {
    const index_t zz = i / dims.w, xx = i % dims.w;
    std::vector<index_t> v;
    std::vector<double> z;
    std::vector<double> line(static_cast<std::size_t>(dims.h));
    std::vector<double> outl(static_cast<std::size_t>(dims.h));
    for (index_t yy = 0; yy < dims.h; ++yy)
      line[static_cast<std::size_t>(yy)] = sq[static_cast<std::size_t>(dims.index(zz, yy, xx))];
    dt1d(line.data(), outl.data(), dims.h, sy, v, z);
    for (index_t yy = 0; yy < dims.h; ++yy)
      sq[static_cast<std::size_t>(dims.index(zz, yy, xx))] = outl[static_cast<std::size_t>(yy)];
  });

  // z pass
  parallel_for(dims.h * dims.w, threads, [&](index_t i) {
    const index_t yy = i / dims.w, xx = i % dims.w;
    std::vector<index_t> v;
    std::vector<double> z;
    std::vector<double> line(static_cast<std::size_t>(dims.d));
    std::vector<double> outl(static_cast<std::size_t>(dims.d));
    for (index_t zz = 0; zz < dims.d; ++zz)
      line[static_cast<std::size_t>(zz)] = sq[static_cast<std::size_t>(dims.index(zz, yy, xx))];
    dt1d(line.data(), outl.data(), dims.d, sz, v, z);
    for (index_t zz = 0; zz < dims.d; ++zz)
      sq[static_cast<std::size_t>(dims.index(zz, yy, xx))] = outl[static_cast<std::size_t>(zz)];
  });

  const double diag = (Vec3d(static_cast<double>(dims.w) * sx, static_cast<double>(dims.h) * sy,
                             static_cast<double>(dims.d) * sz))
                          .norm();
  Grid3<float> out(dims);
  for (index_t i = 0; i < nvox; ++i) {
    const double d2 = sq[static_cast<std::size_t>(i)];
    out[i] = static_cast<float>(d2 >= kFar ? diag : std::sqrt(d2));
  }
  return out;
}

}  // namespace neurite
