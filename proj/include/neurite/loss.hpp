#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "neurite/error.hpp"
#include "neurite/grid.hpp"
#include "neurite/parallel.hpp"

// Reference implementation of the discriminative embedding loss with
// analytic gradients. All accumulation is in double regardless of the field
// scalar type; summation orders are fixed so results do not depend on the
// thread count.

namespace neurite {

struct Margins {
  double delta_v = 0.5;
  double delta_d = 1.5;

  void validate() const {
    if (!(delta_v > 0.0) || !(delta_d > 0.0))
      throw Error(ErrorCode::InvalidConfig, "margins: delta_v and delta_d must be > 0");
    if (delta_d < delta_v)
      throw Error(ErrorCode::InvalidConfig, "margins: delta_d must be >= delta_v");
  }
};

struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.1;
  double eta = 0.001;
  double xi = 1.0;

  void validate() const {
    const double w[5] = {alpha, beta, gamma, eta, xi};
    double sum = 0.0;
    for (double v : w) {
      if (!(v >= 0.0))
        throw Error(ErrorCode::InvalidConfig, "weights: all weights must be >= 0");
      sum += v;
    }
    if (sum == 0.0)
      throw Error(ErrorCode::InvalidConfig, "weights: at least one weight must be > 0");
  }
};

// Probabilities are clamped into [kProbEps, 1 - kProbEps] before the log.
inline constexpr double kProbEps = 1e-7;

struct PatchSpec {
  Vec3i origin = Vec3i::Zero();  // (z, y, x)
  Vec3i size = Vec3i::Zero();    // (d, h, w)

  void validate(const GridDims& dims) const {
    for (int a = 0; a < 3; ++a)
      if (origin[a] < 0 || size[a] < 1)
        throw Error(ErrorCode::InvalidConfig, "patch: negative origin or empty size");
    if (origin[0] + size[0] > dims.d || origin[1] + size[1] > dims.h ||
        origin[2] + size[2] > dims.w)
      throw Error(ErrorCode::InvalidConfig, "patch: extends outside the volume");
  }
};

struct InstanceCluster {
  std::uint32_t instance_id = 0;
  std::vector<index_t> voxels;   // linear indices, ascending
  VecX<double> centroid;         // mean of member embeddings
};

struct LossBreakdown {
  double l_var = 0.0;   // patch mean of l_var_per_patch
  double l_dist = 0.0;  // patch mean of l_dist_per_patch
  double l_con = 0.0;
  double l_reg = 0.0;
  double l_bce = 0.0;
  double total = 0.0;
  std::vector<double> l_var_per_patch;
  std::vector<double> l_dist_per_patch;
  // share of l_con contributed by neighbor pairs with different instance
  // labels (the continuity/distance tension at crossings, reported only)
  double l_con_cross = 0.0;
  index_t n_patches = 0;
};

// Sliding windows (deterministic z,y,x scan) that contain >= 2 distinct
// nonzero labels. Origins step by `stride`; windows must fit entirely.
std::vector<PatchSpec> find_overlap_patches(const LabelVolume& labels, Vec3i patch_size,
                                            Vec3i stride);

// Distinct nonzero labels inside the patch, ascending by label id, with
// centroids of their member embeddings.
template <class T>
std::vector<InstanceCluster> clusters_in_patch(const LabelVolume& labels,
                                               const Field3<T>& field,
                                               const PatchSpec& patch) {
  if (!labels.dims.same_extents(field.dims))
    throw Error(ErrorCode::ShapeMismatch, "clusters_in_patch: labels/field dims differ");
  patch.validate(labels.dims);

  std::vector<std::pair<std::uint32_t, std::vector<index_t>>> groups;
  for (index_t z = patch.origin[0]; z < patch.origin[0] + patch.size[0]; ++z)
    for (index_t y = patch.origin[1]; y < patch.origin[1] + patch.size[1]; ++y)
      for (index_t x = patch.origin[2]; x < patch.origin[2] + patch.size[2]; ++x) {
        const index_t v = labels.dims.index(z, y, x);
        const std::uint32_t id = labels[v];
        if (id == 0) continue;
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == id; });
        if (it == groups.end()) {
          groups.emplace_back(id, std::vector<index_t>{});
          it = std::prev(groups.end());
        }
        it->second.push_back(v);
      }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<InstanceCluster> out;
  out.reserve(groups.size());
  for (auto& [id, voxels] : groups) {
    InstanceCluster c;
    c.instance_id = id;
    c.voxels = std::move(voxels);
    c.centroid = VecX<double>::Zero(field.n);
    for (index_t v : c.voxels) c.centroid += field.embedding(v).template cast<double>();
    c.centroid /= static_cast<double>(c.voxels.size());
    out.push_back(std::move(c));
  }
  return out;
}

// intra-cluster compactness: hinge on ||x_i - mu_c|| - delta_v, squared,
// mean over voxels then over clusters
template <class T>
double variance_term(const Field3<T>& field, const std::vector<InstanceCluster>& clusters,
                     const Margins& margins) {
  margins.validate();
  if (clusters.empty())
    throw Error(ErrorCode::NoInstances, "variance_term: no instances in patch");
  double acc = 0.0;
  for (const InstanceCluster& c : clusters) {
    double cluster_acc = 0.0;
    for (index_t v : c.voxels) {
      const double d = (field.embedding(v).template cast<double>() - c.centroid).norm();
      const double h = std::max(0.0, d - margins.delta_v);
      cluster_acc += h * h;
    }
    acc += cluster_acc / static_cast<double>(c.voxels.size());
  }
  return acc / static_cast<double>(clusters.size());
}

// inter-cluster separation: hinge on 2*delta_d - ||mu_a - mu_b|| over ordered
// pairs; 0 when fewer than two clusters
double distance_term(const std::vector<InstanceCluster>& clusters, const Margins& margins);

namespace detail {

struct ConTotals {
  double all = 0.0;
  double cross = 0.0;
  ConTotals& operator+=(const ConTotals& o) {
    all += o.all;
    cross += o.cross;
    return *this;
  }
};

// Shared walk for the continuity term. labels may be null (no cross split).
template <class T>
ConTotals continuity_sums(const Field3<T>& field, const VoxelMask& domain,
                          const LabelVolume* labels, double delta_v, int threads) {
  const GridDims& dims = domain.dims;
  auto chunk = [&](index_t lo, index_t hi) {
    ConTotals t;
    index_t z, y, x;
    for (index_t v = lo; v < hi; ++v) {
      if (!domain[v]) continue;
      dims.unindex(v, z, y, x);
      double inner = 0.0, inner_cross = 0.0;
      int count = 0;
      for (const auto& o : kNeighborOffsets26) {
        const index_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
        if (!dims.in_bounds(nz, ny, nx)) continue;
        const index_t u = dims.index(nz, ny, nx);
        if (!domain[u]) continue;
        ++count;
        const double d =
            (field.embedding(u).template cast<double>() - field.embedding(v).template cast<double>())
                .norm();
        const double h = std::max(0.0, d - delta_v);
        const double hh = h * h;
        inner += hh;
        if (labels && (*labels)[v] != (*labels)[u] && (*labels)[v] != 0 && (*labels)[u] != 0)
          inner_cross += hh;
      }
      if (count > 0) {
        t.all += inner / count;
        t.cross += inner_cross / count;
      }
    }
    return t;
  };
  return parallel_chunk_sum<ConTotals>(dims.nvox(), threads, 1 << 14, ConTotals{}, chunk);
}

}  // namespace detail

// smoothness along fibers: hinge on neighbor embedding distances, averaged
// over the 26-neighborhood inside the domain, factor 1/2
template <class T>
double continuity_term(const Field3<T>& field, const VoxelMask& domain, double delta_v,
                       int threads = 1) {
  if (!field.dims.same_extents(domain.dims))
    throw Error(ErrorCode::ShapeMismatch, "continuity_term: field/domain dims differ");
  index_t m = 0;
  for (index_t v = 0; v < domain.dims.nvox(); ++v) m += domain[v] ? 1 : 0;
  if (m == 0) throw Error(ErrorCode::EmptyDomain, "continuity_term: empty domain");
  return detail::continuity_sums(field, domain, nullptr, delta_v, threads).all /
         (2.0 * static_cast<double>(m));
}

// mean squared embedding norm over the domain
template <class T>
double regularization_term(const Field3<T>& field, const VoxelMask& domain, int threads = 1) {
  if (!field.dims.same_extents(domain.dims))
    throw Error(ErrorCode::ShapeMismatch, "regularization_term: field/domain dims differ");
  index_t m = 0;
  for (index_t v = 0; v < domain.dims.nvox(); ++v) m += domain[v] ? 1 : 0;
  if (m == 0) throw Error(ErrorCode::EmptyDomain, "regularization_term: empty domain");
  const double acc = parallel_chunk_sum<double>(
      domain.dims.nvox(), threads, 1 << 14, 0.0, [&](index_t lo, index_t hi) {
        double s = 0.0;
        for (index_t v = lo; v < hi; ++v)
          if (domain[v]) s += field.embedding(v).template cast<double>().squaredNorm();
        return s;
      });
  return acc / static_cast<double>(m);
}

// mean binary cross-entropy over all voxels; probabilities clamped to
// [kProbEps, 1 - kProbEps]
template <class T>
double bce_term(const Field3<T>& probabilities, const VoxelMask& truth, int threads = 1) {
  if (!probabilities.dims.same_extents(truth.dims) || probabilities.n != 1)
    throw Error(ErrorCode::ShapeMismatch, "bce_term: probability volume must match mask dims");
  const index_t n = truth.dims.nvox();
  const double acc = parallel_chunk_sum<double>(
      n, threads, 1 << 14, 0.0, [&](index_t lo, index_t hi) {
        double s = 0.0;
        for (index_t v = lo; v < hi; ++v) {
          const double p =
              std::clamp(static_cast<double>(probabilities.at(0, v)), kProbEps, 1.0 - kProbEps);
          s += truth[v] ? -std::log(p) : -std::log1p(-p);
        }
        return s;
      });
  return acc / static_cast<double>(n);
}

template <class T>
LossBreakdown total_loss(const Field3<T>& field, const LabelVolume& labels,
                         const Field3<T>* probabilities, const VoxelMask& truth,
                         const std::vector<PatchSpec>& patches, const Margins& margins,
                         const LossWeights& weights, int threads = 1) {
  margins.validate();
  weights.validate();
  if (!field.dims.same_extents(labels.dims) || !field.dims.same_extents(truth.dims))
    throw Error(ErrorCode::ShapeMismatch, "total_loss: field/labels/mask dims differ");

  LossBreakdown out;
  out.n_patches = static_cast<index_t>(patches.size());
  out.l_var_per_patch.resize(patches.size(), 0.0);
  out.l_dist_per_patch.resize(patches.size(), 0.0);

  parallel_for(static_cast<index_t>(patches.size()), threads, [&](index_t k) {
    const auto clusters = clusters_in_patch(labels, field, patches[static_cast<std::size_t>(k)]);
    if (clusters.empty()) return;  // no instances: both terms stay 0
    out.l_var_per_patch[static_cast<std::size_t>(k)] = variance_term(field, clusters, margins);
    out.l_dist_per_patch[static_cast<std::size_t>(k)] = distance_term(clusters, margins);
  });
  if (!patches.empty()) {
    double sv = 0.0, sd = 0.0;
    for (double v : out.l_var_per_patch) sv += v;
    for (double v : out.l_dist_per_patch) sd += v;
    out.l_var = sv / static_cast<double>(patches.size());
    out.l_dist = sd / static_cast<double>(patches.size());
  }

  index_t m = 0;
  for (index_t v = 0; v < truth.dims.nvox(); ++v) m += truth[v] ? 1 : 0;
  if (m > 0) {
    const auto con = detail::continuity_sums(field, truth, &labels, margins.delta_v, threads);
    out.l_con = con.all / (2.0 * static_cast<double>(m));
    out.l_con_cross = con.cross / (2.0 * static_cast<double>(m));
    out.l_reg = regularization_term(field, truth, threads);
  }
  if (probabilities) out.l_bce = bce_term(*probabilities, truth, threads);

  out.total = weights.alpha * out.l_var + weights.beta * out.l_dist + weights.gamma * out.l_con +
              weights.eta * out.l_reg + weights.xi * out.l_bce;
  return out;
}

template <class T>
struct LossGradient {
  Field3<T> field;                    // d total / d embedding
  Field3<T> probabilities;            // d total / d probability (empty if none)
  LossBreakdown value;
  std::vector<std::uint8_t> field_kink;  // voxel flagged: some incident hinge
                                         // argument within kink_tol of zero
  std::vector<std::uint8_t> prob_kink;
};

// Exact subgradient of the weighted total; 0 is chosen at hinge kinks and at
// norm singularities. kink_tol feeds the flag arrays used to exclude
// coordinates from finite-difference comparisons.
template <class T>
LossGradient<T> grad_total_loss(const Field3<T>& field, const LabelVolume& labels,
                                const Field3<T>* probabilities, const VoxelMask& truth,
                                const std::vector<PatchSpec>& patches, const Margins& margins,
                                const LossWeights& weights, double kink_tol = 1e-3,
                                int threads = 1) {
  LossGradient<T> g;
  g.value = total_loss(field, labels, probabilities, truth, patches, margins, weights, threads);
  g.field = Field3<T>(field.dims, field.n, T{});
  g.field_kink.assign(static_cast<std::size_t>(field.dims.nvox()), 0);
  const index_t nvox = field.dims.nvox();
  const double n_patch = static_cast<double>(patches.size());

  // -- per-patch variance + distance gradients (sparse, merged in patch order)
  struct PatchGrad {
    std::vector<index_t> voxels;
    std::vector<VecX<double>> grads;
    std::vector<index_t> kinks;
  };
  std::vector<PatchGrad> pgrads(patches.size());

  parallel_for(static_cast<index_t>(patches.size()), threads, [&](index_t kk) {
    const std::size_t k = static_cast<std::size_t>(kk);
    const auto clusters = clusters_in_patch(labels, field, patches[k]);
    if (clusters.empty()) return;
    PatchGrad pg;
    const double ck = static_cast<double>(clusters.size());

    // variance
    const double w_var = weights.alpha / n_patch;
    for (const InstanceCluster& c : clusters) {
      const double sz = static_cast<double>(c.voxels.size());
      std::vector<VecX<double>> gi(c.voxels.size());
      VecX<double> gsum = VecX<double>::Zero(field.n);
      bool kink = false;
      for (std::size_t i = 0; i < c.voxels.size(); ++i) {
        const VecX<double> r =
            field.embedding(c.voxels[i]).template cast<double>() - c.centroid;
        const double d = r.norm();
        const double arg = d - margins.delta_v;
        if (std::abs(arg) <= kink_tol) kink = true;
        if (arg > 0.0 && d > 0.0)
          gi[i] = (2.0 * arg / d) * r;
        else
          gi[i] = VecX<double>::Zero(field.n);
        gsum += gi[i];
      }
      gsum /= sz;
      const double coeff = w_var / (ck * sz);
      for (std::size_t i = 0; i < c.voxels.size(); ++i) {
        pg.voxels.push_back(c.voxels[i]);
        pg.grads.push_back(coeff * (gi[i] - gsum));
        if (kink) pg.kinks.push_back(c.voxels[i]);
      }
    }

    // distance (ordered pairs = 2x unordered)
    if (clusters.size() >= 2 && weights.beta > 0.0) {
      const double coeff = weights.beta / (n_patch * ck * (ck - 1.0));
      for (std::size_t a = 0; a < clusters.size(); ++a)
        for (std::size_t b = a + 1; b < clusters.size(); ++b) {
          const VecX<double> e = clusters[a].centroid - clusters[b].centroid;
          const double dn = e.norm();
          const double arg = 2.0 * margins.delta_d - dn;
          const bool kink = std::abs(arg) <= kink_tol || (arg > 0.0 && dn <= kink_tol);
          if (kink) {
            for (index_t v : clusters[a].voxels) pg.kinks.push_back(v);
            for (index_t v : clusters[b].voxels) pg.kinks.push_back(v);
          }
          if (!(arg > 0.0) || !(dn > 0.0)) continue;
          const VecX<double> d_mu = coeff * (-4.0 * arg / dn) * e;  // d/d mu_a
          const VecX<double> ga = d_mu / static_cast<double>(clusters[a].voxels.size());
          const VecX<double> gb = -d_mu / static_cast<double>(clusters[b].voxels.size());
          for (index_t v : clusters[a].voxels) {
            pg.voxels.push_back(v);
            pg.grads.push_back(ga);
          }
          for (index_t v : clusters[b].voxels) {
            pg.voxels.push_back(v);
            pg.grads.push_back(gb);
          }
        }
    }
    pgrads[k] = std::move(pg);
  });

  for (const PatchGrad& pg : pgrads) {
    for (std::size_t i = 0; i < pg.voxels.size(); ++i) {
      auto dst = g.field.embedding(pg.voxels[i]);
      for (index_t c = 0; c < field.n; ++c)
        dst[c] += static_cast<T>(pg.grads[i][c]);
    }
    for (index_t v : pg.kinks) g.field_kink[static_cast<std::size_t>(v)] = 1;
  }

  // -- continuity + regularization gradients (per destination voxel, so
  //    writes are disjoint and thread-count independent)
  index_t m = 0;
  for (index_t v = 0; v < nvox; ++v) m += truth[v] ? 1 : 0;
  if (m > 0 && (weights.gamma > 0.0 || weights.eta > 0.0)) {
    const GridDims& dims = field.dims;
    const double md = static_cast<double>(m);
    // neighbor counts within the domain
    std::vector<std::int32_t> acount(static_cast<std::size_t>(nvox), 0);
    parallel_for((nvox + (1 << 14) - 1) >> 14, threads, [&](index_t chunk) {
      const index_t lo = chunk << 14, hi = std::min(nvox, lo + (1 << 14));
      index_t z, y, x;
      for (index_t v = lo; v < hi; ++v) {
        if (!truth[v]) continue;
        dims.unindex(v, z, y, x);
        int cnt = 0;
        for (const auto& o : kNeighborOffsets26) {
          const index_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
          if (dims.in_bounds(nz, ny, nx) && truth[dims.index(nz, ny, nx)]) ++cnt;
        }
        acount[static_cast<std::size_t>(v)] = cnt;
      }
    });

    parallel_for((nvox + (1 << 14) - 1) >> 14, threads, [&](index_t chunk) {
      const index_t lo = chunk << 14, hi = std::min(nvox, lo + (1 << 14));
      index_t z, y, x;
      VecX<double> acc(field.n);
      for (index_t v = lo; v < hi; ++v) {
        if (!truth[v]) continue;
        acc.setZero();
        bool kink = false;
        if (weights.gamma > 0.0 && acount[static_cast<std::size_t>(v)] > 0) {
          dims.unindex(v, z, y, x);
          const double cv =
              weights.gamma / (2.0 * md * acount[static_cast<std::size_t>(v)]);
          for (const auto& o : kNeighborOffsets26) {
            const index_t nz = z + o[0], ny = y + o[1], nx = x + o[2];
            if (!dims.in_bounds(nz, ny, nx)) continue;
            const index_t u = dims.index(nz, ny, nx);
            if (!truth[u]) continue;
            const VecX<double> e = field.embedding(u).template cast<double>() -
                                   field.embedding(v).template cast<double>();
            const double d = e.norm();
            const double arg = d - margins.delta_v;
            if (std::abs(arg) <= kink_tol) kink = true;
            if (!(arg > 0.0) || !(d > 0.0)) continue;
            const double cu =
                weights.gamma / (2.0 * md * acount[static_cast<std::size_t>(u)]);
            acc -= (cv + cu) * (2.0 * arg / d) * e;
          }
        }
        if (weights.eta > 0.0)
          acc += (2.0 * weights.eta / md) * field.embedding(v).template cast<double>();
        auto dst = g.field.embedding(v);
        for (index_t c = 0; c < field.n; ++c) dst[c] += static_cast<T>(acc[c]);
        if (kink) g.field_kink[static_cast<std::size_t>(v)] = 1;
      }
    });
  }

  // -- BCE gradient w.r.t. probabilities (zero where the clamp is active)
  if (probabilities) {
    g.probabilities = Field3<T>(field.dims, 1, T{});
    g.prob_kink.assign(static_cast<std::size_t>(nvox), 0);
    if (weights.xi > 0.0) {
      const double nd = static_cast<double>(nvox);
      parallel_for((nvox + (1 << 14) - 1) >> 14, threads, [&](index_t chunk) {
        const index_t lo = chunk << 14, hi = std::min(nvox, lo + (1 << 14));
        for (index_t v = lo; v < hi; ++v) {
          const double p = static_cast<double>(probabilities->at(0, v));
          if (p - kProbEps <= kink_tol || (1.0 - kProbEps) - p <= kink_tol)
            g.prob_kink[static_cast<std::size_t>(v)] = 1;
          if (p <= kProbEps || p >= 1.0 - kProbEps) continue;
          const double y = truth[v] ? 1.0 : 0.0;
          g.probabilities.at(0, v) =
              static_cast<T>(weights.xi * (p - y) / (p * (1.0 - p) * nd));
        }
      });
    }
  }
  return g;
}

}  // namespace neurite
