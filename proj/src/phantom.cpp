#include "neurite/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "neurite/rng.hpp"

namespace neurite {

namespace {

Vec3d random_unit(Rng& rng) {
  for (;;) {
    const Vec3d v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

// Exit parameters of the ray p + t*dir against the box, for both directions.
// Returns (t_neg, t_pos) with t_neg < 0 < t_pos.
std::pair<double, double> ray_box_span(const Vec3d& p, const Vec3d& dir, const Box3& box) {
  double t_neg = -1e18, t_pos = 1e18;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-12) continue;
    const double t1 = (box.lo[a] - p[a]) / dir[a];
    const double t2 = (box.hi[a] - p[a]) / dir[a];
    const double tlo = std::min(t1, t2), thi = std::max(t1, t2);
    t_neg = std::max(t_neg, tlo);
    t_pos = std::min(t_pos, thi);
  }
  return {t_neg, t_pos};
}

Vec3d clamp_to_box(const Vec3d& p, const Box3& box) {
  return p.cwiseMax(box.lo).cwiseMin(box.hi);
}

// uniform Catmull-Rom through the waypoints, sampled at roughly step_um
std::vector<Vec3d> catmull_rom(const std::vector<Vec3d>& w, double step_um) {
  std::vector<Vec3d> out;
  if (w.size() < 2) return w;
  auto pt = [&](std::int64_t i) {
    i = std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(w.size()) - 1);
    return w[static_cast<std::size_t>(i)];
  };
  for (std::size_t seg = 0; seg + 1 < w.size(); ++seg) {
    const Vec3d p0 = pt(static_cast<std::int64_t>(seg) - 1), p1 = pt(seg),
                p2 = pt(seg + 1), p3 = pt(static_cast<std::int64_t>(seg) + 2);
    const double len = (p2 - p1).norm();
    const index_t steps = std::max<index_t>(1, static_cast<index_t>(std::ceil(len / step_um)));
    for (index_t s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) / static_cast<double>(steps);
      const double t2 = t * t, t3 = t2 * t;
      const Vec3d p = 0.5 * ((2.0 * p1) + (-p0 + p2) * t +
                             (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                             (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
      out.push_back(p);
    }
  }
  out.push_back(w.back());
  return out;
}

struct Centerline {
  std::vector<Vec3d> points;  // um
  double radius = 1.0;
};

// Terminal clusters of different tubes must not interleave: every tube
// endpoint keeps clear of the other tubes entirely, so terminal pairing
// cannot cross instances.
bool endpoints_clear(const Centerline& cand, const std::vector<Centerline>& tubes) {
  auto dist_to = [](const Vec3d& p, const Centerline& t) {
    double best = 1e18;
    for (const Vec3d& q : t.points) best = std::min(best, (p - q).norm());
    return best;
  };
  for (const Centerline& host : tubes) {
    const double clear_um = std::max(10.0, cand.radius + host.radius + 2.0);
    if (dist_to(cand.points.front(), host) < clear_um) return false;
    if (dist_to(cand.points.back(), host) < clear_um) return false;
    if (dist_to(host.points.front(), cand) < clear_um) return false;
    if (dist_to(host.points.back(), cand) < clear_um) return false;
  }
  return true;
}

// Rejects candidates that hug an existing tube: a transversal crossing
// touches over a short arc only, so long runs inside the contact distance
// mean a near-parallel pass that would entangle the two tubes.
bool contact_acceptable(const Centerline& cand, const std::vector<Centerline>& tubes,
                        double step_um) {
  for (const Centerline& host : tubes) {
    const double contact = cand.radius + host.radius + 0.5 + step_um;
    const double contact2 = contact * contact;
    const double limit_um = 2.5 * (cand.radius + host.radius + 1.0);
    double run_um = 0.0;
    for (const Vec3d& p : cand.points) {
      bool close = false;
      for (std::size_t j = 0; j < host.points.size(); j += 2)
        if ((p - host.points[j]).squaredNorm() < contact2) {
          close = true;
          break;
        }
      run_um = close ? run_um + step_um : 0.0;
      if (run_um > limit_um) return false;
    }
  }
  return true;
}

// random point on a random face of the box
Vec3d random_face_point(Rng& rng, const Box3& box, int& axis) {
  axis = static_cast<int>(rng.uniform_int(0, 2));
  const bool high = rng.uniform() < 0.5;
  Vec3d p;
  for (int a = 0; a < 3; ++a) p[a] = rng.uniform(box.lo[a], box.hi[a]);
  p[axis] = high ? box.hi[axis] : box.lo[axis];
  return p;
}

// face a boundary point sits on (-1 if none); used to test how steeply a
// chord meets the volume boundary so tubes do not graze along faces
int face_axis_of(const Vec3d& p, const Box3& box) {
  for (int a = 0; a < 3; ++a)
    if (std::abs(p[a] - box.lo[a]) < 1e-6 || std::abs(p[a] - box.hi[a]) < 1e-6) return a;
  return -1;
}

// Interior waypoints stay inside an inset box so the centerline only meets
// the volume faces at its endpoints (no face hugging).
std::vector<Vec3d> build_waypoints(Rng& rng, const Vec3d& a, const Vec3d& b,
                                   double curvature, const Box3& box, double inset,
                                   const Vec3d* through) {
  Box3 inner = box;
  inner.lo.array() += inset;
  inner.hi.array() -= inset;
  std::vector<Vec3d> w;
  w.push_back(a);
  auto jittered = [&](const Vec3d& p) {
    if (curvature <= 0.0) return p;  // straight chord stays straight
    Vec3d q = p;
    for (int ax = 0; ax < 3; ++ax) q[ax] += rng.uniform(-curvature, curvature);
    return clamp_to_box(q, inner);
  };
  if (through) {
    w.push_back(jittered(a + 0.5 * (*through - a)));
    w.push_back(*through);
    w.push_back(jittered(*through + 0.5 * (b - *through)));
  } else {
    for (int k = 1; k <= 3; ++k)
      w.push_back(jittered(a + (static_cast<double>(k) / 4.0) * (b - a)));
  }
  w.push_back(b);
  return w;
}

}  // namespace

GridDims default_phantom_dims() {
  GridDims d;
  d.d = d.h = d.w = 128;
  d.voxel_size = Vec3d::Ones();
  return d;
}

PhantomResult gen_phantom(const PhantomSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Box3 box = volume_box_um(spec.dims);
  const double step_um = spec.dims.voxel_size.minCoeff();

  std::vector<Centerline> tubes;
  std::vector<Vec3d> crossing_sites;
  index_t forced = 0;

  // crossing sites keep this much distance so each forms its own cluster
  const double site_spacing = std::min(16.0, 0.3 * (box.hi - box.lo).minCoeff());

  for (index_t i = 0; i < spec.n_tubes; ++i) {
    const bool want_crossing = i >= 1 && forced < spec.crossing_target;
    Centerline tube;
    tube.radius = rng.uniform(spec.radius_min_um, spec.radius_max_um);
    const double inset = tube.radius + 2.0;

    auto try_forced = [&]() {
      for (int attempt = 0; attempt < 128; ++attempt) {
        // pass exactly through a point of an earlier tube, transversally
        const auto& host = tubes[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(tubes.size()) - 1))];
        const std::size_t m = host.points.size();
        if (m < 8) continue;
        const std::size_t pi = static_cast<std::size_t>(rng.uniform_int(
            static_cast<std::int64_t>(m / 4), static_cast<std::int64_t>(3 * m / 4)));
        const Vec3d p = host.points[pi];
        // the crossing site must sit clear of the faces and of other sites,
        // so every target crossing shows up as its own overlap cluster
        if ((p.array() < box.lo.array() + inset).any() ||
            (p.array() > box.hi.array() - inset).any())
          continue;
        bool crowded = false;
        for (const Vec3d& site : crossing_sites)
          if ((p - site).norm() < site_spacing) crowded = true;
        if (crowded) continue;
        const Vec3d tangent = (host.points[std::min(pi + 1, m - 1)] -
                               host.points[pi > 0 ? pi - 1 : 0])
                                  .normalized();
        const Vec3d dir = random_unit(rng);
        if (std::abs(dir.dot(tangent)) > 0.6) continue;  // not transversal enough
        const auto [t_neg, t_pos] = ray_box_span(p, dir, box);
        if (t_pos - t_neg < 0.5 * (box.hi - box.lo).minCoeff()) continue;
        const Vec3d a = p + t_neg * dir;
        const Vec3d b = p + t_pos * dir;
        const int fa = face_axis_of(a, box), fb = face_axis_of(b, box);
        if (fa < 0 || fb < 0 || std::abs(dir[fa]) < 0.4 || std::abs(dir[fb]) < 0.4)
          continue;  // grazing exit
        const auto w = build_waypoints(rng, a, b, spec.curvature_um, box, inset, &p);
        tube.points = catmull_rom(w, step_um);
        if (!contact_acceptable(tube, tubes, step_um)) continue;
        if (!endpoints_clear(tube, tubes)) continue;
        ++forced;
        crossing_sites.push_back(p);
        return true;
      }
      return false;
    };
    auto try_free = [&]() {
      for (int attempt = 0; attempt < 128; ++attempt) {
        int fa = 0, fb = 0;
        const Vec3d a = random_face_point(rng, box, fa);
        const Vec3d b = random_face_point(rng, box, fb);
        if ((b - a).norm() < 0.5 * (box.hi - box.lo).minCoeff()) continue;
        const Vec3d dir = (b - a).normalized();
        if (std::abs(dir[fa]) < 0.4 || std::abs(dir[fb]) < 0.4) continue;  // grazing entry
        const auto w = build_waypoints(rng, a, b, spec.curvature_um, box, inset, nullptr);
        tube.points = catmull_rom(w, step_um);
        if (!contact_acceptable(tube, tubes, step_um)) continue;
        if (!endpoints_clear(tube, tubes)) continue;
        return true;
      }
      return false;
    };

    // a tube that cannot meet the crossing target still gets placed; the
    // shortfall is reported through placement_failure
    const bool placed = (want_crossing && try_forced()) || try_free();
    if (!placed) continue;
    for (Vec3d& p : tube.points) p = clamp_to_box(p, box);
    tubes.push_back(std::move(tube));
  }

  // one SWC path per tube
  std::vector<SwcNode> nodes;
  std::int64_t next_id = 1;
  for (const Centerline& tube : tubes) {
    std::int64_t prev = -1;
    for (const Vec3d& p : tube.points) {
      SwcNode n;
      n.id = next_id++;
      n.type_code = 0;
      n.x = p[0];
      n.y = p[1];
      n.z = p[2];
      n.radius = tube.radius;
      n.parent = prev;
      prev = n.id;
      nodes.push_back(n);
    }
  }

  PhantomResult out;
  out.gt = SwcForest::from_nodes(std::move(nodes));
  out.labels = rasterize(out.gt, spec.dims, /*per_component_ids=*/true, &out.raster);
  out.mask = mask_from_labels(out.labels);
  out.crossing_clusters = out.raster.crossing_clusters;
  out.placement_failure = out.crossing_clusters < spec.crossing_target ||
                          static_cast<index_t>(tubes.size()) < spec.n_tubes;
  return out;
}

Field3<float> oracle_embedding(const LabelVolume& labels, index_t n, double separation,
                               double noise_sigma, std::uint64_t seed) {
  if (n < 2)
    throw Error(ErrorCode::InvalidConfig, "oracle_embedding: n must be >= 2");
  if (!(separation > 0.0))
    throw Error(ErrorCode::InvalidConfig, "oracle_embedding: separation must be > 0");
  if (noise_sigma < 0.0)
    throw Error(ErrorCode::InvalidConfig, "oracle_embedding: negative noise");

  std::map<std::uint32_t, VecX<double>> base;  // ordered by label id
  for (index_t v = 0; v < labels.dims.nvox(); ++v)
    if (labels[v]) base.emplace(labels[v], VecX<double>());

  Rng rng(seed);
  std::vector<VecX<double>> placed;
  index_t slot = 0;
  for (auto& [id, vec] : base) {
    if (slot < n) {
      vec = VecX<double>::Zero(n);
      vec[slot] = separation;
    } else {
      // rejection sampling on a sphere of radius 1.25 * separation
      bool ok = false;
      for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
        VecX<double> cand(n);
        for (index_t c = 0; c < n; ++c) cand[c] = rng.normal();
        const double norm = cand.norm();
        if (norm < 1e-9) continue;
        cand *= 1.25 * separation / norm;
        ok = true;
        for (const auto& other : placed)
          if ((cand - other).norm() < separation) {
            ok = false;
            break;
          }
        if (ok) vec = std::move(cand);
      }
      if (!ok)
        throw Error(ErrorCode::TooManyInstances,
                    "oracle_embedding: cannot place " + std::to_string(base.size()) +
                        " vectors at separation " + std::to_string(separation) +
                        " in dimension " + std::to_string(n));
    }
    placed.push_back(vec);
    ++slot;
  }

  Field3<float> field(labels.dims, n, 0.0f);
  const index_t nvox = labels.dims.nvox();
  for (index_t v = 0; v < nvox; ++v) {
    const std::uint32_t id = labels[v];
    if (id != 0) {
      const VecX<double>& vec = base.at(id);
      for (index_t c = 0; c < n; ++c)
        field.data[static_cast<std::size_t>(c * nvox + v)] = static_cast<float>(vec[c]);
    }
    if (noise_sigma > 0.0)
      for (index_t c = 0; c < n; ++c)
        field.data[static_cast<std::size_t>(c * nvox + v)] +=
            static_cast<float>(noise_sigma * rng.normal());
  }
  return field;
}

}  // namespace neurite
