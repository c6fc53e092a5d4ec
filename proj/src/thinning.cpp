#include "neurite/thinning.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <vector>

namespace neurite {

namespace {

// 3x3x3 neighborhood as 27 bits, cell = (dz+1)*9 + (dy+1)*3 + (dx+1).
constexpr int kCenter = 13;
constexpr std::uint32_t kAll26 = 0x07FFFFFFu & ~(1u << kCenter);

struct Tables {
  std::array<std::uint32_t, 27> adj26{};  // Chebyshev distance 1
  std::array<std::uint32_t, 27> adj6{};   // Manhattan distance 1
  std::uint32_t n18 = 0;                  // 18-neighborhood cells
  std::uint32_t faces = 0;                // 6 face cells

  Tables() {
    auto coords = [](int c) {
      return std::array<int, 3>{c / 9 - 1, (c % 9) / 3 - 1, c % 3 - 1};
    };
    for (int a = 0; a < 27; ++a) {
      const auto ca = coords(a);
      const int manh_a = std::abs(ca[0]) + std::abs(ca[1]) + std::abs(ca[2]);
      if (a != kCenter && manh_a <= 2) n18 |= 1u << a;
      if (manh_a == 1) faces |= 1u << a;
      for (int b = 0; b < 27; ++b) {
        if (a == b) continue;
        const auto cb = coords(b);
        const int dz = std::abs(ca[0] - cb[0]), dy = std::abs(ca[1] - cb[1]),
                  dx = std::abs(ca[2] - cb[2]);
        if (std::max({dz, dy, dx}) == 1) adj26[static_cast<std::size_t>(a)] |= 1u << b;
        if (dz + dy + dx == 1) adj6[static_cast<std::size_t>(a)] |= 1u << b;
      }
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

std::uint32_t flood(std::uint32_t seed, std::uint32_t domain,
                    const std::array<std::uint32_t, 27>& adj) {
  std::uint32_t comp = seed, frontier = seed;
  while (frontier) {
    std::uint32_t next = 0;
    std::uint32_t f = frontier;
    while (f) {
      const int b = std::countr_zero(f);
      f &= f - 1;
      next |= adj[static_cast<std::size_t>(b)];
    }
    next &= domain & ~comp;
    comp |= next;
    frontier = next;
  }
  return comp;
}

// (26, 6) simple point test on a packed neighborhood:
// exactly one 26-component of object neighbors, and exactly one 6-component
// of background cells in the 18-neighborhood that touches a face of p.
bool simple_bits(std::uint32_t bits) {
  const Tables& t = tables();
  std::uint32_t obj = bits & kAll26;
  if (obj == 0) return false;
  if (flood(obj & (~obj + 1), obj, t.adj26) != obj) return false;  // > 1 object component

  std::uint32_t bg = ~bits & t.n18;
  if ((bg & t.faces) == 0) return false;  // interior point
  int touching = 0;
  while (bg) {
    const std::uint32_t comp = flood(bg & (~bg + 1), bg, t.adj6);
    if (comp & t.faces) ++touching;
    bg &= ~comp;
  }
  return touching == 1;
}

inline bool endpoint_bits(std::uint32_t bits) {
  return std::popcount(bits & kAll26) == 1;
}

std::uint32_t gather_bits(const VoxelMask& g, index_t z, index_t y, index_t x) {
  const GridDims& dims = g.dims;
  std::uint32_t bits = 0;
  if (z > 0 && z < dims.d - 1 && y > 0 && y < dims.h - 1 && x > 0 && x < dims.w - 1) {
    int cell = 0;
    for (index_t dz = -1; dz <= 1; ++dz)
      for (index_t dy = -1; dy <= 1; ++dy)
        for (index_t dx = -1; dx <= 1; ++dx, ++cell)
          if (g[dims.index(z + dz, y + dy, x + dx)]) bits |= 1u << cell;
  } else {
    int cell = 0;
    for (index_t dz = -1; dz <= 1; ++dz)
      for (index_t dy = -1; dy <= 1; ++dy)
        for (index_t dx = -1; dx <= 1; ++dx, ++cell)
          if (dims.in_bounds(z + dz, y + dy, x + dx) && g[dims.index(z + dz, y + dy, x + dx)])
            bits |= 1u << cell;
  }
  return bits;
}

}  // namespace

bool is_simple_point(const VoxelMask& mask, index_t voxel) {
  index_t z, y, x;
  mask.dims.unindex(voxel, z, y, x);
  return simple_bits(gather_bits(mask, z, y, x));
}

VoxelMask thin(const VoxelMask& mask) {
  VoxelMask out = mask;
  const GridDims& dims = out.dims;

  // U, D along z; N, S along y; E, W along x
  constexpr index_t kDirs[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                                   {0, 1, 0},  {0, 0, 1},  {0, 0, -1}};

  std::vector<index_t> object;
  for (index_t v = 0; v < dims.nvox(); ++v)
    if (out[v]) object.push_back(v);

  std::vector<index_t> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& dir : kDirs) {
      candidates.clear();
      for (index_t v : object) {
        if (!out[v]) continue;
        index_t z, y, x;
        dims.unindex(v, z, y, x);
        const index_t bz = z + dir[0], by = y + dir[1], bx = x + dir[2];
        if (dims.in_bounds(bz, by, bx) && out[dims.index(bz, by, bx)]) continue;  // not a border
        const std::uint32_t bits = gather_bits(out, z, y, x);
        if (!endpoint_bits(bits) && simple_bits(bits)) candidates.push_back(v);
      }
      // deletion with re-check in fixed voxel order: each removal on its own
      // preserves topology, so the whole subiteration does
      for (index_t v : candidates) {
        index_t z, y, x;
        dims.unindex(v, z, y, x);
        const std::uint32_t bits = gather_bits(out, z, y, x);
        if (!endpoint_bits(bits) && simple_bits(bits)) {
          out[v] = 0;
          changed = true;
        }
      }
    }
    if (changed) {
      std::vector<index_t> still;
      still.reserve(object.size());
      for (index_t v : object)
        if (out[v]) still.push_back(v);
      object = std::move(still);
    }
  }
  return out;
}

}  // namespace neurite
