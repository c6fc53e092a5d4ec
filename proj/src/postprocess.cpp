#include "neurite/postprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "neurite/edt.hpp"
#include "neurite/parallel.hpp"
#include "neurite/thinning.hpp"

namespace neurite {

namespace {

struct UnionFind {
  std::vector<index_t> parent;

  explicit UnionFind(index_t n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), index_t{0});
  }
  index_t find(index_t a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(index_t a, index_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

double embedding_distance(const Field3<float>& field, index_t a, index_t b) {
  double acc = 0.0;
  const index_t nvox = field.dims.nvox();
  const float* base = field.data.data();
  for (index_t c = 0; c < field.n; ++c) {
    const double d = static_cast<double>(base[c * nvox + a]) -
                     static_cast<double>(base[c * nvox + b]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

LabelVolume split_by_embedding(const VoxelMask& mask, const Field3<float>& field,
                               double epsilon) {
  if (!mask.dims.same_extents(field.dims))
    throw Error(ErrorCode::ShapeMismatch, "split_by_embedding: mask/field dims differ");

  const GridDims& dims = mask.dims;
  const index_t nvox = dims.nvox();
  UnionFind uf(nvox);

  // forward half of the 26-neighborhood: offsets lexicographically > (0,0,0)
  index_t z, y, x;
  for (index_t v = 0; v < nvox; ++v) {
    if (!mask[v]) continue;
    dims.unindex(v, z, y, x);
    for (const auto& o : kNeighborOffsets26) {
      if (o[0] < 0 || (o[0] == 0 && (o[1] < 0 || (o[1] == 0 && o[2] < 0)))) continue;
      const index_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
      if (!dims.in_bounds(nz, ny, nx)) continue;
      const index_t u = dims.index(nz, ny, nx);
      if (!mask[u]) continue;
      if (std::isinf(epsilon) || embedding_distance(field, v, u) <= epsilon) uf.unite(v, u);
    }
  }

  // component sizes and representative (smallest) voxel index
  std::unordered_map<index_t, std::pair<index_t, index_t>> comp;  // root -> (size, min voxel)
  for (index_t v = 0; v < nvox; ++v) {
    if (!mask[v]) continue;
    const index_t r = uf.find(v);
    auto& entry = comp.try_emplace(r, std::pair<index_t, index_t>{0, v}).first->second;
    entry.first += 1;
    entry.second = std::min(entry.second, v);
  }

  // labels 1..K by decreasing size, ties by smallest voxel index
  std::vector<std::pair<index_t, index_t>> order;  // (root, unused)
  order.reserve(comp.size());
  for (const auto& [root, info] : comp) order.emplace_back(root, 0);
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    const auto& ia = comp.at(a.first);
    const auto& ib = comp.at(b.first);
    if (ia.first != ib.first) return ia.first > ib.first;
    return ia.second < ib.second;
  });
  std::unordered_map<index_t, std::uint32_t> label_of;
  for (std::size_t i = 0; i < order.size(); ++i)
    label_of[order[i].first] = static_cast<std::uint32_t>(i + 1);

  LabelVolume out(dims, 0);
  for (index_t v = 0; v < nvox; ++v)
    if (mask[v]) out[v] = label_of.at(uf.find(v));
  return out;
}

LabelVolume thin_segments(const LabelVolume& segments, int threads) {
  const GridDims& dims = segments.dims;
  const index_t nvox = dims.nvox();

  // bounding box per segment
  std::unordered_map<std::uint32_t, std::array<index_t, 6>> boxes;  // z0 y0 x0 z1 y1 x1
  index_t z, y, x;
  for (index_t v = 0; v < nvox; ++v) {
    const std::uint32_t id = segments[v];
    if (!id) continue;
    dims.unindex(v, z, y, x);
    auto it = boxes.find(id);
    if (it == boxes.end()) {
      boxes[id] = {z, y, x, z, y, x};
    } else {
      auto& b = it->second;
      b[0] = std::min(b[0], z);
      b[1] = std::min(b[1], y);
      b[2] = std::min(b[2], x);
      b[3] = std::max(b[3], z);
      b[4] = std::max(b[4], y);
      b[5] = std::max(b[5], x);
    }
  }
  std::vector<std::uint32_t> ids;
  ids.reserve(boxes.size());
  for (const auto& [id, box] : boxes) ids.push_back(id);
  std::sort(ids.begin(), ids.end());

  std::vector<std::vector<index_t>> kept(ids.size());  // skeleton voxels per segment
  parallel_for(static_cast<index_t>(ids.size()), threads, [&](index_t i) {
    const std::uint32_t id = ids[static_cast<std::size_t>(i)];
    const auto& b = boxes.at(id);
    GridDims local;
    local.d = b[3] - b[0] + 1;
    local.h = b[4] - b[1] + 1;
    local.w = b[5] - b[2] + 1;
    local.voxel_size = dims.voxel_size;
    VoxelMask seg(local, 0);
    for (index_t lz = 0; lz < local.d; ++lz)
      for (index_t ly = 0; ly < local.h; ++ly)
        for (index_t lx = 0; lx < local.w; ++lx)
          if (segments[dims.index(b[0] + lz, b[1] + ly, b[2] + lx)] == id)
            seg.at(lz, ly, lx) = 1;
    const VoxelMask thinned = thin(seg);
    auto& out = kept[static_cast<std::size_t>(i)];
    for (index_t lz = 0; lz < local.d; ++lz)
      for (index_t ly = 0; ly < local.h; ++ly)
        for (index_t lx = 0; lx < local.w; ++lx)
          if (thinned.at(lz, ly, lx))
            out.push_back(dims.index(b[0] + lz, b[1] + ly, b[2] + lx));
  });

  LabelVolume out(dims, 0);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (index_t v : kept[i]) out[v] = ids[i];
  return out;
}

Skeleton reconnect(const LabelVolume& segments, const Field3<float>& field,
                   const ReconParams& params) {
  if (!segments.dims.same_extents(field.dims))
    throw Error(ErrorCode::ShapeMismatch, "reconnect: segments/field dims differ");
  params.validate();

  const GridDims& dims = segments.dims;
  Skeleton sk;
  sk.dims = dims;
  for (index_t v = 0; v < dims.nvox(); ++v)
    if (segments[v]) sk.voxels.push_back(v);

  // intra-segment 26-adjacency (forward offsets only, so each edge once)
  index_t z, y, x;
  for (index_t v : sk.voxels) {
    dims.unindex(v, z, y, x);
    for (const auto& o : kNeighborOffsets26) {
      if (o[0] < 0 || (o[0] == 0 && (o[1] < 0 || (o[1] == 0 && o[2] < 0)))) continue;
      const index_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
      if (!dims.in_bounds(nz, ny, nx)) continue;
      const index_t u = dims.index(nz, ny, nx);
      if (segments[u] && segments[u] == segments[v])
        sk.edges.push_back({v, u, false, 0.0});
    }
  }

  // cross-segment jump links: per voxel, the closest partner in another
  // segment within the Chebyshev ball and below epsilon. The skeleton is
  // sparse, so candidates come from a z-slab sweep over skeleton voxels
  // instead of scanning the dense ball.
  const index_t r = params.jump_radius;
  std::vector<std::vector<index_t>> by_slice(static_cast<std::size_t>(dims.d));
  for (index_t v : sk.voxels) by_slice[static_cast<std::size_t>(v / (dims.h * dims.w))].push_back(v);

  std::vector<SkeletonEdge> jumps;
  index_t uz, uy, ux;
  for (index_t v : sk.voxels) {
    dims.unindex(v, z, y, x);
    double best = std::numeric_limits<double>::infinity();
    index_t best_u = -1;
    const index_t z0 = std::max<index_t>(0, z - r), z1 = std::min(dims.d - 1, z + r);
    for (index_t zz = z0; zz <= z1; ++zz)
      for (index_t u : by_slice[static_cast<std::size_t>(zz)]) {
        if (u == v || segments[u] == segments[v]) continue;
        dims.unindex(u, uz, uy, ux);
        if (std::abs(uy - y) > r || std::abs(ux - x) > r) continue;
        const double d = embedding_distance(field, v, u);
        if (d >= params.epsilon) continue;
        if (d < best || (d == best && u < best_u)) {
          best = d;
          best_u = u;
        }
      }
    if (best_u >= 0) {
      SkeletonEdge e;
      e.a = std::min(v, best_u);
      e.b = std::max(v, best_u);
      e.jump = true;
      e.embedding_distance = best;
      jumps.push_back(e);
    }
  }
  std::sort(jumps.begin(), jumps.end(), [](const SkeletonEdge& a, const SkeletonEdge& b) {
    return a.a != b.a ? a.a < b.a : a.b < b.b;
  });
  jumps.erase(std::unique(jumps.begin(), jumps.end(),
                          [](const SkeletonEdge& a, const SkeletonEdge& b) {
                            return a.a == b.a && a.b == b.b;
                          }),
              jumps.end());
  sk.edges.insert(sk.edges.end(), jumps.begin(), jumps.end());
  return sk;
}

SwcForest build_forest(const Skeleton& skeleton, const VoxelMask& mask,
                       const ReconParams& params, ReconReport* report, int threads) {
  params.validate();
  if (skeleton.voxels.empty())
    throw Error(ErrorCode::EmptySkeleton, "build_forest: skeleton has no voxels");
  if (!skeleton.dims.same_extents(mask.dims))
    throw Error(ErrorCode::ShapeMismatch, "build_forest: skeleton/mask dims differ");

  ReconReport local;
  ReconReport& rep = report ? *report : local;

  const GridDims& dims = skeleton.dims;
  const Grid3<float> dt = distance_transform_um(mask, threads);

  // dense index over skeleton voxels (which are sorted ascending)
  const std::vector<index_t>& vox = skeleton.voxels;
  auto slot_of = [&](index_t v) {
    return static_cast<std::size_t>(
        std::lower_bound(vox.begin(), vox.end(), v) - vox.begin());
  };

  std::vector<std::vector<std::size_t>> adj(vox.size());
  for (const SkeletonEdge& e : skeleton.edges) {
    const std::size_t a = slot_of(e.a), b = slot_of(e.b);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  // connected components over slots
  std::vector<std::int64_t> comp(vox.size(), -1);
  std::vector<std::vector<std::size_t>> comp_slots;
  for (std::size_t seed = 0; seed < vox.size(); ++seed) {
    if (comp[seed] >= 0) continue;
    const std::int64_t c = static_cast<std::int64_t>(comp_slots.size());
    comp_slots.emplace_back();
    std::vector<std::size_t> stack{seed};
    comp[seed] = c;
    while (!stack.empty()) {
      const std::size_t s = stack.back();
      stack.pop_back();
      comp_slots.back().push_back(s);
      for (std::size_t t : adj[s])
        if (comp[t] < 0) {
          comp[t] = c;
          stack.push_back(t);
        }
    }
  }

  const index_t min_keep = std::max<index_t>(params.min_component_voxels, 1);
  std::vector<SwcNode> nodes;
  std::int64_t next_id = 1;

  for (auto& slots : comp_slots) {
    if (static_cast<index_t>(slots.size()) < min_keep) {
      rep.dropped_components += 1;
      rep.dropped_component_voxels += static_cast<index_t>(slots.size());
      continue;
    }
    std::sort(slots.begin(), slots.end());

    // root: maximal distance-transform value, ties by smallest voxel index
    std::size_t root = slots[0];
    for (std::size_t s : slots) {
      const float dv = dt[vox[s]];
      const float dr = dt[vox[root]];
      if (dv > dr || (dv == dr && vox[s] < vox[root])) root = s;
    }

    // BFS; neighbor order ascending by slot = ascending voxel index
    std::vector<std::size_t> queue{root};
    std::size_t qhead = 0;
    index_t tree_edges = 0;

    std::unordered_map<std::size_t, std::int64_t> swc_id;
    std::unordered_map<std::size_t, std::int64_t> parent_of;
    parent_of[root] = -1;
    swc_id[root] = next_id++;
    while (qhead < queue.size()) {
      const std::size_t s = queue[qhead++];
      for (std::size_t t : adj[s]) {
        if (swc_id.count(t)) continue;
        swc_id[t] = next_id++;
        parent_of[t] = static_cast<std::int64_t>(s);
        queue.push_back(t);
        ++tree_edges;
      }
    }

    index_t comp_edges = 0;
    for (std::size_t s : slots)
      for (std::size_t t : adj[s])
        if (t > s && comp[t] == comp[s]) ++comp_edges;
    rep.dropped_cycle_edges += comp_edges - tree_edges;

    for (std::size_t s : queue) {
      const index_t v = vox[s];
      index_t z, y, x;
      dims.unindex(v, z, y, x);
      SwcNode n;
      n.id = swc_id.at(s);
      n.type_code = 0;
      const Vec3d p = dims.voxel_to_um(z, y, x);
      n.x = p[0];
      n.y = p[1];
      n.z = p[2];
      n.radius = static_cast<double>(dt[v]);
      const std::int64_t ps = parent_of.at(s);
      n.parent = ps < 0 ? -1 : swc_id.at(static_cast<std::size_t>(ps));
      nodes.push_back(n);
    }
  }

  rep.skeleton_voxels = static_cast<index_t>(nodes.size());
  for (const SkeletonEdge& e : skeleton.edges) rep.jump_edges += e.jump ? 1 : 0;
  return SwcForest::from_nodes(std::move(nodes));
}

SwcForest reconstruct(const VoxelMask& mask, const Field3<float>& field,
                      const ReconParams& params, ReconReport* report, int threads) {
  params.validate();
  ReconReport local;
  ReconReport& rep = report ? *report : local;
  rep = ReconReport{};

  const LabelVolume segments = split_by_embedding(mask, field, params.epsilon);
  std::uint32_t max_label = 0;
  for (index_t v = 0; v < segments.dims.nvox(); ++v) max_label = std::max(max_label, segments[v]);
  rep.micro_segments = max_label;
  if (max_label == 0) return SwcForest{};  // empty mask -> empty forest

  const LabelVolume skeleton_labels = thin_segments(segments, threads);
  const Skeleton sk = reconnect(skeleton_labels, field, params);
  if (sk.voxels.empty()) return SwcForest{};
  return build_forest(sk, mask, params, &rep, threads);
}

}  // namespace neurite
