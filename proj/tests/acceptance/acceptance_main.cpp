// Acceptance suite: one line per criterion, pinned tolerances.
// Usage: neurite-acceptance [--cli <path-to-neurite-recon>] [--only N]

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "neurite/conn_eval.hpp"
#include "neurite/loss.hpp"
#include "neurite/phantom.hpp"
#include "neurite/pipeline.hpp"
#include "neurite/postprocess.hpp"
#include "neurite/rng.hpp"
#include "neurite/swc.hpp"
#include "neurite/thinning.hpp"
#include "neurite/volume_io.hpp"
#include "support/oracles.hpp"
#include "support/shapes.hpp"

using namespace neurite;
namespace fs = std::filesystem;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double rel(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// ---------------------------------------------------------------- 1

std::string criterion_loss_bruteforce() {
  const double t0 = now_s();
  Rng rng(20250810);
  Margins m{0.5, 1.5};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const index_t extent = 4 + rng.uniform_int(0, 4);  // up to 8^3
    const index_t channels = 1 + rng.uniform_int(0, 3);  // up to 4
    auto inst = oracle::random_instance(rng, extent, channels, 4);

    const index_t pd = std::max<index_t>(2, extent - 2);
    PatchSpec patch;
    patch.origin = Vec3i(1, 0, 1);
    patch.size = Vec3i(pd, std::max<index_t>(2, extent - 1), pd);
    const auto clusters = clusters_in_patch(inst.labels, inst.field, patch);
    if (!clusters.empty()) {
      worst = std::max(worst, rel(variance_term(inst.field, clusters, m),
                                  oracle::naive_variance(inst.field, inst.labels, 1, 0, 1, pd,
                                                         std::max<index_t>(2, extent - 1), pd,
                                                         m.delta_v)));
      worst = std::max(worst, rel(distance_term(clusters, m),
                                  oracle::naive_distance(inst.field, inst.labels, 1, 0, 1, pd,
                                                         std::max<index_t>(2, extent - 1), pd,
                                                         m.delta_d)));
    }
    bool any = false;
    for (index_t v = 0; v < inst.mask.dims.nvox(); ++v) any |= inst.mask[v] != 0;
    if (any) {
      worst = std::max(worst, rel(continuity_term(inst.field, inst.mask, m.delta_v),
                                  oracle::naive_continuity(inst.field, inst.mask, m.delta_v)));
      worst = std::max(worst, rel(regularization_term(inst.field, inst.mask),
                                  oracle::naive_regularization(inst.field, inst.mask)));
    }
    worst = std::max(worst, rel(bce_term(inst.probs, inst.mask),
                                oracle::naive_bce(inst.probs, inst.mask)));
  }
  const double dt = now_s() - t0;
  if (worst > 1e-10) return fmt("max rel error %.3e exceeds 1e-10", worst);
  if (dt > 10.0) return fmt("runtime %.1f s exceeds 10 s", dt);
  std::printf("  (max rel %.3e over 50 instances, %.2f s)\n", worst, dt);
  return "";
}

// ---------------------------------------------------------------- 2

std::string criterion_gradient_check() {
  const double t0 = now_s();
  Rng rng(42);
  Margins m{0.5, 1.5};
  LossWeights w{1.0, 1.0, 0.1, 0.001, 1.0};
  const double step = 1e-4;
  double worst = 0.0;
  index_t checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = oracle::random_instance(rng, 6, 1 + (trial % 4), 4);
    const auto patches = find_overlap_patches(inst.labels, Vec3i(3, 3, 3), Vec3i(3, 3, 3));
    const auto grad = grad_total_loss(inst.field, inst.labels, &inst.probs, inst.mask,
                                      patches, m, w, /*kink_tol=*/1e-3);
    for (index_t c = 0; c < inst.field.n; ++c)
      for (index_t v = 0; v < inst.dims.nvox(); ++v) {
        if (grad.field_kink[static_cast<std::size_t>(v)]) continue;
        const std::size_t idx = static_cast<std::size_t>(c * inst.dims.nvox() + v);
        const double saved = inst.field.data[idx];
        inst.field.data[idx] = saved + step;
        const double up =
            total_loss(inst.field, inst.labels, &inst.probs, inst.mask, patches, m, w).total;
        inst.field.data[idx] = saved - step;
        const double dn =
            total_loss(inst.field, inst.labels, &inst.probs, inst.mask, patches, m, w).total;
        inst.field.data[idx] = saved;
        const double fd = (up - dn) / (2.0 * step);
        worst = std::max(worst, rel(grad.field.data[idx], fd));
        ++checked;
      }
  }
  const double dt = now_s() - t0;
  if (worst > 1e-5) return fmt("max rel error %.3e exceeds 1e-5", worst);
  if (dt > 60.0) return fmt("runtime %.1f s exceeds 60 s", dt);
  std::printf("  (max rel %.3e over %lld coordinates, %.2f s)\n", worst,
              static_cast<long long>(checked), dt);
  return "";
}

// ---------------------------------------------------------------- 3

std::string criterion_satisfied_margins() {
  PhantomSpec spec;
  spec.dims = shapes::iso(48, 48, 48);
  spec.n_tubes = 3;
  spec.crossing_target = 2;
  spec.seed = 11;
  const PhantomResult ph = gen_phantom(spec);
  const Field3<float> field = oracle_embedding(ph.labels, 8, 3.0, 0.0, 77);

  Margins m{0.5, 1.5};  // 2 delta_d = 3 <= oracle separation
  LossWeights w{1, 1, 1, 0, 0};
  const auto patches = find_overlap_patches(ph.labels, Vec3i(16, 16, 16), Vec3i(8, 8, 8));
  const LossBreakdown b = total_loss<float>(field, ph.labels, nullptr, ph.mask, patches, m, w);
  if (b.l_var != 0.0) return fmt("l_var = %.3e, expected exactly 0", b.l_var);
  if (b.l_dist != 0.0) return fmt("l_dist = %.3e, expected exactly 0", b.l_dist);

  const Field3<float> constant(ph.mask.dims, 4, 0.75f);
  const double l_con = continuity_term(constant, ph.mask, m.delta_v);
  if (l_con != 0.0) return fmt("l_con on constant field = %.3e, expected exactly 0", l_con);
  return "";
}

// ---------------------------------------------------------------- 4

std::string criterion_thinning() {
  using shapes::iso;
  struct Shape {
    std::string name;
    VoxelMask mask;
    bool is_tube = false;
    bool is_torus = false;
  };
  std::vector<Shape> suite;

  // tubes along each axis and diagonals, various radii
  suite.push_back({"tube-x-r2", shapes::capsule(iso(14, 14, 50), Vec3d(5, 7, 7), Vec3d(45, 7, 7), 2.0), true, false});
  suite.push_back({"tube-x-r3", shapes::capsule(iso(16, 16, 60), Vec3d(5, 8, 8), Vec3d(55, 8, 8), 3.0), true, false});
  suite.push_back({"tube-y-r2.5", shapes::capsule(iso(16, 50, 16), Vec3d(8, 5, 8), Vec3d(8, 45, 8), 2.5), true, false});
  suite.push_back({"tube-z-r3", shapes::capsule(iso(50, 16, 16), Vec3d(8, 8, 5), Vec3d(8, 8, 45), 3.0), true, false});
  suite.push_back({"tube-diag-r2", shapes::capsule(iso(40, 40, 40), Vec3d(5, 5, 5), Vec3d(34, 34, 34), 2.0), true, false});
  suite.push_back({"tube-diag2-r2.5", shapes::capsule(iso(40, 40, 40), Vec3d(5, 34, 5), Vec3d(34, 5, 34), 2.5), true, false});
  for (int k = 0; k < 4; ++k) {
    const double r = 1.5 + 0.5 * k;
    suite.push_back({fmt("tube-var-r%.1f", r),
                     shapes::capsule(iso(14 + 2 * k, 16, 56), Vec3d(5, 8, 7 + k),
                                     Vec3d(50, 8, 7 + k), r),
                     true, false});
  }
  // Y junctions
  suite.push_back({"y-r2", shapes::y_junction(iso(12, 40, 40), 2.0), false, false});
  suite.push_back({"y-r2.5", shapes::y_junction(iso(14, 44, 44), 2.5), false, false});
  suite.push_back({"y-r3", shapes::y_junction(iso(16, 48, 48), 3.0), false, false});
  // tori
  suite.push_back({"torus-12-3", shapes::torus(iso(24, 40, 40), 12.0, 3.0), false, true});
  suite.push_back({"torus-10-2.5", shapes::torus(iso(20, 36, 36), 10.0, 2.5), false, true});
  suite.push_back({"torus-8-2", shapes::torus(iso(16, 30, 30), 8.0, 2.0), false, true});
  // plates
  suite.push_back({"plate-t3", shapes::plate(iso(16, 30, 30), 3), false, false});
  suite.push_back({"plate-t5", shapes::plate(iso(20, 34, 34), 5), false, false});
  // two components
  {
    VoxelMask two(iso(20, 20, 40), 0);
    const VoxelMask a = shapes::capsule(iso(20, 20, 40), Vec3d(4, 10, 10), Vec3d(16, 10, 10), 2.5);
    const VoxelMask b = shapes::capsule(iso(20, 20, 40), Vec3d(24, 10, 10), Vec3d(36, 10, 10), 2.5);
    for (index_t v = 0; v < two.dims.nvox(); ++v) two[v] = a[v] || b[v];
    suite.push_back({"two-tubes", two, false, false});
  }
  // bent tube
  {
    VoxelMask bent(iso(16, 40, 40), 0);
    const VoxelMask a = shapes::capsule(iso(16, 40, 40), Vec3d(5, 5, 8), Vec3d(30, 5, 8), 2.5);
    const VoxelMask b = shapes::capsule(iso(16, 40, 40), Vec3d(30, 5, 8), Vec3d(30, 33, 8), 2.5);
    for (index_t v = 0; v < bent.dims.nvox(); ++v) bent[v] = a[v] || b[v];
    suite.push_back({"bent-tube", bent, true, false});
  }

  if (suite.size() < 20) return fmt("suite has %zu shapes, expected 20", suite.size());

  for (const Shape& s : suite) {
    const auto before = mask_components26(s.mask).second;
    const VoxelMask skel = thin(s.mask);

    for (index_t v = 0; v < s.mask.dims.nvox(); ++v)
      if (skel[v] && !s.mask[v]) return s.name + ": output is not a subset of the input";

    const VoxelMask again = thin(skel);
    if (again.data != skel.data) return s.name + ": thin is not idempotent";

    const auto after = mask_components26(skel).second;
    if (before != after)
      return fmt("%s: component count changed %u -> %u", s.name.c_str(), before, after);

    const auto stats = shapes::skeleton_stats(skel);
    if (s.is_torus) {
      const index_t betti1 = stats.edges - stats.vertices + stats.components;
      if (betti1 != 1) return fmt("%s: torus cycle count %lld, expected 1", s.name.c_str(),
                                  static_cast<long long>(betti1));
    }
    if (s.is_tube && stats.endpoints != 2)
      return fmt("%s: %lld endpoints, expected 2", s.name.c_str(),
                 static_cast<long long>(stats.endpoints));
  }
  std::printf("  (20 shapes: subset, idempotence, components, cycles, endpoints)\n");
  return "";
}

// ---------------------------------------------------------------- 5

std::string criterion_end_to_end() {
  const double t0 = now_s();
  long ec = 0, e1 = 0, e2 = 0, bc = 0, b1 = 0, b2 = 0;
  for (int i = 0; i < 100; ++i) {
    PipelineConfig cfg;
    cfg.phantom.dims = default_phantom_dims();  // 128^3
    cfg.phantom.n_tubes = 2 + (i % 3);
    cfg.phantom.crossing_target = std::min<index_t>(1 + (i % 2), cfg.phantom.n_tubes - 1);
    cfg.phantom.noise_sigma = 0.2;
    cfg.phantom.separation = 3.0;
    cfg.phantom.seed = 1 + i;
    cfg.recon.epsilon = 1.0;
    cfg.threads = 1;

    const PipelineResult emb = run_pipeline(cfg);
    ec += emb.connectivity.correct;
    e1 += emb.connectivity.type1;
    e2 += emb.connectivity.type2;

    PipelineConfig base = cfg;  // binary-segmentation baseline
    base.recon.epsilon = std::numeric_limits<double>::infinity();
    const PipelineResult b = run_pipeline(base);
    bc += b.connectivity.correct;
    b1 += b.connectivity.type1;
    b2 += b.connectivity.type2;
  }
  const double dt = now_s() - t0;
  if (ec == 0) return "embedded pipeline produced no correct components";
  const double r1 = static_cast<double>(e1) / static_cast<double>(ec);
  const double r2 = static_cast<double>(e2) / static_cast<double>(ec);
  const double br2 = bc > 0 ? static_cast<double>(b2) / static_cast<double>(bc)
                            : std::numeric_limits<double>::infinity();
  std::printf(
      "  (embedded: correct=%ld type1=%ld type2=%ld ratio1=%.4f ratio2=%.4f | baseline:"
      " correct=%ld type2=%ld ratio2=%.4f | %.0f s)\n",
      ec, e1, e2, r1, r2, bc, b2, bc > 0 ? br2 : -1.0, dt);
  if (r2 > 0.05) return fmt("mean type2/correct %.4f exceeds 0.05", r2);
  if (r1 > 0.02) return fmt("mean type1/correct %.4f exceeds 0.02", r1);
  if (b2 == 0) return "baseline produced no type2 errors; no contrast to measure";
  if (br2 < 3.0 * r2 || br2 <= 0.0)
    return fmt("baseline ratio2 %.4f is not 3x the embedded %.4f", br2, r2);
  if (dt > 900.0) return fmt("runtime %.0f s exceeds 15 min", dt);
  return "";
}

// ---------------------------------------------------------------- 6

std::string criterion_connectivity_sanity() {
  // self-evaluation of ground-truth forests
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const SwcForest f = oracle::random_forest(rng, 40 + 10 * trial);
    Box3 box;
    box.lo = Vec3d(-150, -150, -150);
    box.hi = Vec3d(150, 150, 150);
    const auto [pairing, rep] = evaluate_connectivity(f, f, box, 1.0, 1.0);
    if (rep.correct != static_cast<index_t>(forest_components(f).size()) || rep.type1 != 0 ||
        rep.type2 != 0)
      return fmt("self-eval trial %d: correct=%lld type1=%lld type2=%lld", trial,
                 static_cast<long long>(rep.correct), static_cast<long long>(rep.type1),
                 static_cast<long long>(rep.type2));
  }
  {
    PhantomSpec spec;
    spec.dims = shapes::iso(48, 48, 48);
    spec.n_tubes = 3;
    spec.crossing_target = 1;
    spec.seed = 3;
    const PhantomResult ph = gen_phantom(spec);
    const Box3 box = volume_box_um(spec.dims);
    const auto [pairing, rep] = evaluate_connectivity(ph.gt, ph.gt, box, 2.0, 5.0);
    if (rep.correct != 3 || rep.type1 != 0 || rep.type2 != 0)
      return "phantom gt self-eval is not (3, 0, 0)";
  }

  // hand-constructed cut: one path reconstructed as two halves
  auto path = [](std::int64_t first, double x0, double x1, int count, double y) {
    std::vector<SwcNode> nodes;
    for (int i = 0; i < count; ++i) {
      SwcNode n;
      n.id = first + i;
      n.x = x0 + (x1 - x0) * i / (count - 1);
      n.y = y;
      n.radius = 1.0;
      n.parent = i == 0 ? -1 : first + i - 1;
      nodes.push_back(n);
    }
    return nodes;
  };
  Box3 box;
  box.lo = Vec3d(-5, -5, -5);
  box.hi = Vec3d(105, 25, 5);
  {
    const SwcForest gt = SwcForest::from_nodes(path(1, 0, 100, 11, 0));
    auto cut = path(1, 0, 50, 6, 0);
    const auto right = path(101, 60, 100, 5, 0);
    cut.insert(cut.end(), right.begin(), right.end());
    const SwcForest pred = SwcForest::from_nodes(cut);
    const auto [pairing, rep] = evaluate_connectivity(gt, pred, box, 1.0, 5.0);
    if (rep.type1 != 1 || rep.type2 != 0)
      return fmt("cut path: type1=%lld type2=%lld, expected 1/0",
                 static_cast<long long>(rep.type1), static_cast<long long>(rep.type2));
  }
  {
    auto gt_nodes = path(1, 0, 100, 6, 0);
    const auto second = path(101, 0, 100, 6, 20);
    gt_nodes.insert(gt_nodes.end(), second.begin(), second.end());
    const SwcForest gt = SwcForest::from_nodes(gt_nodes);

    auto merged = path(1, 0, 100, 6, 0);
    for (SwcNode n : path(201, 0, 100, 6, 20)) {
      if (n.parent == -1) n.parent = 1;
      merged.push_back(n);
    }
    const SwcForest pred = SwcForest::from_nodes(merged);
    const auto [pairing, rep] = evaluate_connectivity(gt, pred, box, 1.0, 5.0);
    if (rep.type2 != 1 || rep.type1 != 0)
      return fmt("merged pair: type1=%lld type2=%lld, expected 0/1",
                 static_cast<long long>(rep.type1), static_cast<long long>(rep.type2));
  }
  return "";
}

// ---------------------------------------------------------------- 7

std::string criterion_seg_metrics() {
  GridDims dims = shapes::iso(6, 6, 6);
  Rng rng(9);
  VoxelMask m(dims, 0);
  for (index_t v = 0; v < dims.nvox(); ++v) m[v] = rng.uniform() < 0.4;
  const SegMetrics same = seg_metrics(m, m);
  if (same.accuracy != 1.0 || same.precision != 1.0 || same.recall != 1.0 || same.f1 != 1.0 ||
      same.dice != 1.0 || same.iou != 1.0)
    return "identical masks do not score exactly 1.0";

  // hand-counted confusion cases
  {
    GridDims two = shapes::iso(1, 1, 2);
    VoxelMask truth(two, 1), pred(two, 0);
    pred[0] = 1;
    const SegMetrics s = seg_metrics(pred, truth);
    if (std::abs(s.precision - 1.0) > 1e-12 || std::abs(s.recall - 0.5) > 1e-12 ||
        std::abs(s.dice - 2.0 / 3.0) > 1e-12 || std::abs(s.iou - 0.5) > 1e-12)
      return "half-coverage confusion case mismatch";
  }
  {
    GridDims four = shapes::iso(1, 2, 2);
    VoxelMask truth(four, 0), pred(four, 0);
    truth[0] = truth[1] = 1;  // TP=1 FP=1 FN=1 TN=1
    pred[0] = pred[2] = 1;
    const SegMetrics s = seg_metrics(pred, truth);
    if (std::abs(s.accuracy - 0.5) > 1e-12 || std::abs(s.precision - 0.5) > 1e-12 ||
        std::abs(s.recall - 0.5) > 1e-12 || std::abs(s.dice - 0.5) > 1e-12 ||
        std::abs(s.iou - 1.0 / 3.0) > 1e-12)
      return "2x2 confusion case mismatch";
  }
  {
    GridDims five = shapes::iso(1, 1, 5);
    VoxelMask truth(five, 0), pred(five, 0);
    truth[0] = truth[1] = truth[2] = 1;  // TP=2 FP=1 FN=1 TN=1
    pred[0] = pred[1] = pred[3] = 1;
    const SegMetrics s = seg_metrics(pred, truth);
    if (std::abs(s.accuracy - 0.6) > 1e-12 || std::abs(s.precision - 2.0 / 3.0) > 1e-12 ||
        std::abs(s.recall - 2.0 / 3.0) > 1e-12 || std::abs(s.dice - 2.0 / 3.0) > 1e-12 ||
        std::abs(s.iou - 0.5) > 1e-12)
      return "5-voxel confusion case mismatch";
  }

  for (int trial = 0; trial < 100; ++trial) {
    VoxelMask a(dims, 0), b(dims, 0);
    for (index_t v = 0; v < dims.nvox(); ++v) {
      a[v] = rng.uniform() < 0.5;
      b[v] = rng.uniform() < 0.5;
    }
    const SegMetrics s = seg_metrics(a, b);
    if (std::abs(s.dice - 2.0 * s.iou / (1.0 + s.iou)) > 1e-12)
      return fmt("dice/iou identity violated at trial %d", trial);
  }
  return "";
}

// ---------------------------------------------------------------- 8

std::string criterion_format_fidelity() {
  Rng rng(88);
  for (int trial = 0; trial < 200; ++trial) {
    const SwcForest f = oracle::random_forest(rng, 10 + rng.uniform_int(0, 60));
    const SwcForest g = parse_swc_string(write_swc(f));
    if (f.size() != g.size()) return fmt("swc round trip %d: node count changed", trial);
    for (const SwcNode& n : f.nodes()) {
      if (!g.has_id(n.id)) return fmt("swc round trip %d: id %lld lost", trial,
                                      static_cast<long long>(n.id));
      const SwcNode& o = g.node(n.id);
      if (n.x != o.x || n.y != o.y || n.z != o.z || n.radius != o.radius ||
          n.parent != o.parent || n.type_code != o.type_code)
        return fmt("swc round trip %d: values changed at id %lld", trial,
                   static_cast<long long>(n.id));
    }
  }

  const fs::path dir = fs::temp_directory_path() / "neurite_acceptance_io";
  fs::create_directories(dir);
  auto file_bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  const GridDims dims = shapes::iso(9, 7, 11);
  {
    VoxelMask v(dims, 0);
    for (index_t i = 0; i < dims.nvox(); ++i) v[i] = rng.uniform() < 0.5;
    write_volume((dir / "a_u8.json").string(), v);
    const VoxelMask back = read_mask((dir / "a_u8.json").string());
    write_volume((dir / "b_u8.json").string(), back);
    if (file_bytes(dir / "a_u8.raw") != file_bytes(dir / "b_u8.raw"))
      return "u8 payload differs after round trip";
  }
  {
    LabelVolume v(dims, 0);
    for (index_t i = 0; i < dims.nvox(); ++i)
      v[i] = static_cast<std::uint32_t>(rng.uniform_int(0, 1 << 30));
    write_volume((dir / "a_u32.json").string(), v);
    write_volume((dir / "b_u32.json").string(), read_labels((dir / "a_u32.json").string()));
    if (file_bytes(dir / "a_u32.raw") != file_bytes(dir / "b_u32.raw"))
      return "u32 payload differs after round trip";
  }
  {
    Field3<float> v(dims, 5);
    for (auto& x : v.data) x = static_cast<float>(rng.uniform(-1e6, 1e6));
    write_volume((dir / "a_f32.json").string(), v);
    write_volume((dir / "b_f32.json").string(), read_field((dir / "a_f32.json").string()));
    if (file_bytes(dir / "a_f32.raw") != file_bytes(dir / "b_f32.raw"))
      return "f32 payload differs after round trip";
  }
  std::printf("  (200 SWC files, 3 volume dtypes)\n");
  return "";
}

// ---------------------------------------------------------------- 9

std::string g_cli_path;

std::string criterion_determinism() {
  if (g_cli_path.empty()) return "no --cli path given";
  const fs::path root = fs::temp_directory_path() / "neurite_acceptance_det";
  fs::remove_all(root);
  fs::create_directories(root);

  auto file_bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  for (int seed = 1; seed <= 10; ++seed) {
    const fs::path a = root / ("a" + std::to_string(seed));
    const fs::path b = root / ("b" + std::to_string(seed));
    for (int pass = 0; pass < 2; ++pass) {
      const fs::path& out = pass == 0 ? a : b;
      const int threads = pass == 0 ? 1 : 8;
      std::ostringstream cmd;
      cmd << g_cli_path << " --threads " << threads << " pipeline --dims 96 --tubes 3"
          << " --crossings 2 --noise 0.2 --seed " << seed << " -o " << out.string()
          << " > /dev/null 2>&1";
      if (std::system(cmd.str().c_str()) != 0)
        return fmt("pipeline run failed for seed %d threads %d", seed, threads);
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      const fs::path other = b / entry.path().filename();
      if (!fs::exists(other)) return fmt("seed %d: missing %s", seed, other.string().c_str());
      if (file_bytes(entry.path()) != file_bytes(other))
        return fmt("seed %d: %s differs between thread counts", seed,
                   entry.path().filename().string().c_str());
    }
  }
  std::printf("  (10 seeds, --threads 1 vs 8, all artifacts byte-identical)\n");
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<std::string()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "loss terms match brute force (rel <= 1e-10, < 10 s)", criterion_loss_bruteforce},
      {2, "analytic gradient matches finite differences (rel <= 1e-5, < 60 s)",
       criterion_gradient_check},
      {3, "satisfied-margin configurations give exact zeros", criterion_satisfied_margins},
      {4, "thinning properties on the 20-shape suite", criterion_thinning},
      {5, "end-to-end topology on 100 phantoms, embedding vs baseline (< 15 min)",
       criterion_end_to_end},
      {6, "connectivity metric sanity (self-eval, cut, merge)", criterion_connectivity_sanity},
      {7, "segmentation metrics identities", criterion_seg_metrics},
      {8, "format fidelity (SWC round trip, volume dtypes)", criterion_format_fidelity},
      {9, "pipeline determinism across thread counts", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    try {
      detail = c.run();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      std::printf("[PASS] criterion %d: %s\n", c.id, c.name);
    } else {
      std::printf("[FAIL] criterion %d: %s (%s)\n", c.id, c.name, detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures;
}
