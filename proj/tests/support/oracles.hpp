#pragma once

// Naive, independent re-implementations used as test oracles. Everything in
// here is deliberately written as plain loops over raw values so it shares
// no math with the library path it checks.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "neurite/grid.hpp"
#include "neurite/loss.hpp"
#include "neurite/rng.hpp"
#include "neurite/swc.hpp"

namespace oracle {

using neurite::Field3;
using neurite::GridDims;
using neurite::index_t;
using neurite::LabelVolume;
using neurite::VoxelMask;

inline double emb(const Field3<double>& f, index_t c, index_t z, index_t y, index_t x) {
  return f.data[static_cast<std::size_t>(c * f.dims.nvox() + f.dims.index(z, y, x))];
}

inline double pair_dist(const Field3<double>& f, index_t za, index_t ya, index_t xa,
                        index_t zb, index_t yb, index_t xb) {
  double s = 0.0;
  for (index_t c = 0; c < f.n; ++c) {
    const double d = emb(f, c, za, ya, xa) - emb(f, c, zb, yb, xb);
    s += d * d;
  }
  return std::sqrt(s);
}

// variance term over one patch, written as bare loops: clusters are the
// distinct nonzero labels restricted to the patch
inline double naive_variance(const Field3<double>& f, const LabelVolume& labels,
                             index_t z0, index_t y0, index_t x0, index_t pd, index_t ph,
                             index_t pw, double delta_v) {
  std::map<std::uint32_t, std::vector<std::array<index_t, 3>>> clusters;
  for (index_t z = z0; z < z0 + pd; ++z)
    for (index_t y = y0; y < y0 + ph; ++y)
      for (index_t x = x0; x < x0 + pw; ++x) {
        const std::uint32_t id = labels[labels.dims.index(z, y, x)];
        if (id) clusters[id].push_back({z, y, x});
      }
  if (clusters.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [id, members] : clusters) {
    std::vector<double> mu(static_cast<std::size_t>(f.n), 0.0);
    for (const auto& m : members)
      for (index_t c = 0; c < f.n; ++c)
        mu[static_cast<std::size_t>(c)] += emb(f, c, m[0], m[1], m[2]);
    for (auto& v : mu) v /= static_cast<double>(members.size());
    double acc = 0.0;
    for (const auto& m : members) {
      double d2 = 0.0;
      for (index_t c = 0; c < f.n; ++c) {
        const double d = emb(f, c, m[0], m[1], m[2]) - mu[static_cast<std::size_t>(c)];
        d2 += d * d;
      }
      const double hinge = std::max(0.0, std::sqrt(d2) - delta_v);
      acc += hinge * hinge;
    }
    total += acc / static_cast<double>(members.size());
  }
  return total / static_cast<double>(clusters.size());
}

inline double naive_distance(const Field3<double>& f, const LabelVolume& labels, index_t z0,
                             index_t y0, index_t x0, index_t pd, index_t ph, index_t pw,
                             double delta_d) {
  std::map<std::uint32_t, std::vector<std::array<index_t, 3>>> clusters;
  for (index_t z = z0; z < z0 + pd; ++z)
    for (index_t y = y0; y < y0 + ph; ++y)
      for (index_t x = x0; x < x0 + pw; ++x) {
        const std::uint32_t id = labels[labels.dims.index(z, y, x)];
        if (id) clusters[id].push_back({z, y, x});
      }
  const std::size_t k = clusters.size();
  if (k < 2) return 0.0;
  std::vector<std::vector<double>> mus;
  for (const auto& [id, members] : clusters) {
    std::vector<double> mu(static_cast<std::size_t>(f.n), 0.0);
    for (const auto& m : members)
      for (index_t c = 0; c < f.n; ++c)
        mu[static_cast<std::size_t>(c)] += emb(f, c, m[0], m[1], m[2]);
    for (auto& v : mu) v /= static_cast<double>(members.size());
    mus.push_back(mu);
  }
  double acc = 0.0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      double d2 = 0.0;
      for (index_t c = 0; c < f.n; ++c) {
        const double d = mus[a][static_cast<std::size_t>(c)] - mus[b][static_cast<std::size_t>(c)];
        d2 += d * d;
      }
      const double hinge = std::max(0.0, 2.0 * delta_d - std::sqrt(d2));
      acc += hinge * hinge;
    }
  return acc / (static_cast<double>(k) * static_cast<double>(k - 1));
}

inline double naive_continuity(const Field3<double>& f, const VoxelMask& domain,
                               double delta_v) {
  const GridDims& dims = domain.dims;
  index_t m = 0;
  double total = 0.0;
  for (index_t z = 0; z < dims.d; ++z)
    for (index_t y = 0; y < dims.h; ++y)
      for (index_t x = 0; x < dims.w; ++x) {
        if (!domain[dims.index(z, y, x)]) continue;
        ++m;
        double inner = 0.0;
        int count = 0;
        for (index_t dz = -1; dz <= 1; ++dz)
          for (index_t dy = -1; dy <= 1; ++dy)
            for (index_t dx = -1; dx <= 1; ++dx) {
              if (dz == 0 && dy == 0 && dx == 0) continue;
              const index_t nz = z + dz, ny = y + dy, nx = x + dx;
              if (!dims.in_bounds(nz, ny, nx) || !domain[dims.index(nz, ny, nx)]) continue;
              ++count;
              const double hinge =
                  std::max(0.0, pair_dist(f, z, y, x, nz, ny, nx) - delta_v);
              inner += hinge * hinge;
            }
        if (count > 0) total += inner / count;
      }
  return m == 0 ? 0.0 : total / (2.0 * static_cast<double>(m));
}

inline double naive_regularization(const Field3<double>& f, const VoxelMask& domain) {
  index_t m = 0;
  double total = 0.0;
  for (index_t v = 0; v < domain.dims.nvox(); ++v) {
    if (!domain[v]) continue;
    ++m;
    for (index_t c = 0; c < f.n; ++c) {
      const double e = f.data[static_cast<std::size_t>(c * f.dims.nvox() + v)];
      total += e * e;
    }
  }
  return m == 0 ? 0.0 : total / static_cast<double>(m);
}

inline double naive_bce(const Field3<double>& probs, const VoxelMask& truth) {
  double total = 0.0;
  const index_t n = truth.dims.nvox();
  for (index_t v = 0; v < n; ++v) {
    double p = probs.data[static_cast<std::size_t>(v)];
    if (p < 1e-7) p = 1e-7;
    if (p > 1.0 - 1e-7) p = 1.0 - 1e-7;
    total += truth[v] ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(n);
}

// --- random instance builders ------------------------------------------

struct RandomInstance {
  GridDims dims;
  Field3<double> field;
  LabelVolume labels;
  VoxelMask mask;
  Field3<double> probs;
};

inline RandomInstance random_instance(neurite::Rng& rng, index_t extent, index_t n_channels,
                                      index_t max_instances) {
  RandomInstance inst;
  inst.dims.d = inst.dims.h = inst.dims.w = extent;
  inst.dims.voxel_size = neurite::Vec3d::Ones();
  inst.field = Field3<double>(inst.dims, n_channels);
  inst.labels = LabelVolume(inst.dims, 0);
  inst.mask = VoxelMask(inst.dims, 0);
  inst.probs = Field3<double>(inst.dims, 1);
  const index_t k = rng.uniform_int(1, max_instances);
  for (index_t v = 0; v < inst.dims.nvox(); ++v) {
    const double roll = rng.uniform();
    if (roll < 0.6) {
      inst.labels[v] = static_cast<std::uint32_t>(rng.uniform_int(1, k));
      inst.mask[v] = 1;
    }
    inst.probs.data[static_cast<std::size_t>(v)] = rng.uniform(0.05, 0.95);
    for (index_t c = 0; c < n_channels; ++c)
      inst.field.data[static_cast<std::size_t>(c * inst.dims.nvox() + v)] =
          rng.uniform(-2.0, 2.0);
  }
  return inst;
}

// random forest with n nodes spread over a handful of trees
inline neurite::SwcForest random_forest(neurite::Rng& rng, index_t n_nodes) {
  std::vector<neurite::SwcNode> nodes;
  for (index_t i = 1; i <= n_nodes; ++i) {
    neurite::SwcNode n;
    n.id = i;
    n.type_code = static_cast<int>(rng.uniform_int(0, 7));
    n.x = rng.uniform(-100.0, 100.0);
    n.y = rng.uniform(-100.0, 100.0);
    n.z = rng.uniform(-100.0, 100.0);
    n.radius = rng.uniform(0.1, 5.0);
    n.parent = (i == 1 || rng.uniform() < 0.15) ? -1 : rng.uniform_int(1, i - 1);
    nodes.push_back(n);
  }
  return neurite::SwcForest::from_nodes(std::move(nodes));
}

// union-find oracle over parent edges, for forest_components
inline std::size_t union_find_components(const neurite::SwcForest& f) {
  std::map<std::int64_t, std::int64_t> parent;
  for (const auto& n : f.nodes()) parent[n.id] = n.id;
  std::function<std::int64_t(std::int64_t)> find = [&](std::int64_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& n : f.nodes())
    if (n.parent != -1) parent[find(n.id)] = find(n.parent);
  std::set<std::int64_t> roots;
  for (const auto& n : f.nodes()) roots.insert(find(n.id));
  return roots.size();
}

}  // namespace oracle
