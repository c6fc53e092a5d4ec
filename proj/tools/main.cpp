// neurite-recon: skeleton reconstruction from embedding fields, discriminative
// loss reference evaluation, phantom generation and connectivity metrics.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "neurite/config.hpp"
#include "neurite/conn_eval.hpp"
#include "neurite/edt.hpp"
#include "neurite/loss.hpp"
#include "neurite/phantom.hpp"
#include "neurite/pipeline.hpp"
#include "neurite/postprocess.hpp"
#include "neurite/provenance.hpp"
#include "neurite/rasterize.hpp"
#include "neurite/rng.hpp"
#include "neurite/swc.hpp"
#include "neurite/volume_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace neurite;

namespace {

// ---------------------------------------------------------------- helpers

std::vector<double> parse_csv_reals(const std::string& text, std::size_t want,
                                    const std::string& flag) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      throw Error(ErrorCode::InvalidConfig, flag + ": cannot parse '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.size() == 1 && want == 3) out = {out[0], out[0], out[0]};
  if (out.size() != want)
    throw Error(ErrorCode::InvalidConfig, flag + ": expected " + std::to_string(want) +
                                              " comma-separated values");
  return out;
}

GridDims parse_dims(const std::string& dims_text, const std::string& voxel_text) {
  const auto d = parse_csv_reals(dims_text, 3, "--dims");
  const auto v = parse_csv_reals(voxel_text, 3, "--voxel-size");
  GridDims g;
  g.d = static_cast<index_t>(d[0]);
  g.h = static_cast<index_t>(d[1]);
  g.w = static_cast<index_t>(d[2]);
  g.voxel_size = Vec3d(v[0], v[1], v[2]);
  if (!g.valid()) throw Error(ErrorCode::InvalidConfig, "--dims/--voxel-size: invalid grid");
  return g;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path, ErrorKind::Runtime);
  out << j.dump(2) << '\n';
}

json connectivity_json(const ConnectivityReport& rep, const TerminalPairing& pairing) {
  json j;
  j["correct"] = rep.correct;
  j["type1"] = rep.type1;
  j["type2"] = rep.type2;
  j["ratio1"] = rep.ratio1 ? json(*rep.ratio1) : json(nullptr);
  j["ratio2"] = rep.ratio2 ? json(*rep.ratio2) : json(nullptr);
  j["pairs"] = pairing.pairs.size();
  j["unmatched_gt"] = pairing.unmatched_gt.size();
  j["unmatched_pred"] = pairing.unmatched_pred.size();
  j["empty_pairing"] = rep.empty_pairing;
  auto detail = [](const std::vector<ComponentDetail>& list) {
    json arr = json::array();
    for (const ComponentDetail& d : list) {
      json e;
      e["component"] = d.component;
      e["matched_terminals"] = d.matched_terminals;
      e["spans"] = d.spans;
      arr.push_back(e);
    }
    return arr;
  };
  j["gt_detail"] = detail(rep.gt_detail);
  j["pred_detail"] = detail(rep.pred_detail);
  return j;
}

json breakdown_json(const LossBreakdown& b) {
  json j;
  j["l_var"] = b.l_var;
  j["l_dist"] = b.l_dist;
  j["l_con"] = b.l_con;
  j["l_con_cross"] = b.l_con_cross;
  j["l_reg"] = b.l_reg;
  j["l_bce"] = b.l_bce;
  j["total"] = b.total;
  j["n_patches"] = b.n_patches;
  j["l_var_per_patch"] = b.l_var_per_patch;
  j["l_dist_per_patch"] = b.l_dist_per_patch;
  return j;
}

json recon_report_json(const ReconReport& r) {
  json j;
  j["micro_segments"] = r.micro_segments;
  j["skeleton_voxels"] = r.skeleton_voxels;
  j["jump_edges"] = r.jump_edges;
  j["dropped_cycle_edges"] = r.dropped_cycle_edges;
  j["dropped_components"] = r.dropped_components;
  j["dropped_component_voxels"] = r.dropped_component_voxels;
  return j;
}

json seg_metrics_json(const SegMetrics& m) {
  json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["dice"] = m.dice;
  j["iou"] = m.iou;
  return j;
}

Matching parse_matching(const std::string& s) {
  if (s == "greedy") return Matching::Greedy;
  if (s == "optimal") return Matching::Optimal;
  throw Error(ErrorCode::InvalidConfig, "--matching: expected greedy or optimal");
}

// resolves flag > config file > built-in default
double resolve(const CLI::Option* opt, double flag_value, const TomlConfig& cfg,
               const char* section, const char* key) {
  if (opt->count() > 0) return flag_value;
  return cfg.get_double(section, key).value_or(flag_value);
}

std::int64_t resolve_i(const CLI::Option* opt, std::int64_t flag_value, const TomlConfig& cfg,
                       const char* section, const char* key) {
  if (opt->count() > 0) return flag_value;
  return cfg.get_int(section, key).value_or(flag_value);
}

// shared CLI state
struct Common {
  std::string config_path;
  int threads = 1;
  TomlConfig cfg;

  void load() {
    if (!config_path.empty()) cfg = TomlConfig::parse_file(config_path);
  }
};

struct PhantomFlags {
  std::string dims = "128";
  std::string voxel_size = "1";
  std::int64_t tubes = 3;
  std::int64_t crossings = 1;
  double radius_min = 2.0;
  double radius_max = 3.0;
  double curvature = 6.0;
  double noise = 0.1;
  std::int64_t embed_dim = 8;
  double separation = 3.0;
  std::uint64_t seed = 1;

  CLI::Option *o_tubes, *o_crossings, *o_rmin, *o_rmax, *o_curv, *o_noise, *o_dim, *o_sep,
      *o_seed;

  void add(CLI::App* cmd) {
    cmd->add_option("--dims", dims, "grid extents d[,h,w] in voxels");
    cmd->add_option("--voxel-size", voxel_size, "voxel size sz[,sy,sx] in um");
    o_tubes = cmd->add_option("--tubes", tubes, "number of tubes");
    o_crossings = cmd->add_option("--crossings", crossings, "crossing site target");
    o_rmin = cmd->add_option("--radius-min", radius_min, "tube radius lower bound (um)");
    o_rmax = cmd->add_option("--radius-max", radius_max, "tube radius upper bound (um)");
    o_curv = cmd->add_option("--curvature", curvature, "waypoint jitter amplitude (um)");
    o_noise = cmd->add_option("--noise", noise, "embedding noise sigma");
    o_dim = cmd->add_option("--embed-dim", embed_dim, "embedding channels");
    o_sep = cmd->add_option("--separation", separation, "instance vector separation");
    o_seed = cmd->add_option("--seed,--phantom-seed", seed, "phantom seed");
  }

  PhantomSpec spec(const TomlConfig& cfg) const {
    PhantomSpec s;
    s.dims = parse_dims(dims, voxel_size);
    s.n_tubes = resolve_i(o_tubes, tubes, cfg, "phantom", "tubes");
    s.crossing_target = resolve_i(o_crossings, crossings, cfg, "phantom", "crossings");
    s.radius_min_um = resolve(o_rmin, radius_min, cfg, "phantom", "radius_min");
    s.radius_max_um = resolve(o_rmax, radius_max, cfg, "phantom", "radius_max");
    s.curvature_um = resolve(o_curv, curvature, cfg, "phantom", "curvature");
    s.noise_sigma = resolve(o_noise, noise, cfg, "phantom", "noise");
    s.embed_dim = resolve_i(o_dim, embed_dim, cfg, "phantom", "embed_dim");
    s.separation = resolve(o_sep, separation, cfg, "phantom", "separation");
    s.seed = static_cast<std::uint64_t>(
        resolve_i(o_seed, static_cast<std::int64_t>(seed), cfg, "phantom", "seed"));
    s.validate();
    return s;
  }

  json echo(const PhantomSpec& s) const {
    json j;
    j["dims"] = {s.dims.d, s.dims.h, s.dims.w};
    j["voxel_size"] = {s.dims.voxel_size[0], s.dims.voxel_size[1], s.dims.voxel_size[2]};
    j["tubes"] = s.n_tubes;
    j["crossings"] = s.crossing_target;
    j["radius_min"] = s.radius_min_um;
    j["radius_max"] = s.radius_max_um;
    j["curvature"] = s.curvature_um;
    j["noise"] = s.noise_sigma;
    j["embed_dim"] = s.embed_dim;
    j["separation"] = s.separation;
    j["seed"] = s.seed;
    return j;
  }
};

struct ReconFlags {
  double epsilon = 1.0;
  std::int64_t jump_radius = 16;
  std::int64_t min_size = 5;
  CLI::Option *o_eps, *o_jump, *o_min;

  void add(CLI::App* cmd) {
    o_eps = cmd->add_option("--epsilon", epsilon,
                            "embedding-distance threshold (inf disables gating)");
    o_jump = cmd->add_option("--jump-radius", jump_radius, "Chebyshev radius for jump links");
    o_min = cmd->add_option("--min-size", min_size, "drop components below this voxel count");
  }

  ReconParams params(const TomlConfig& cfg) const {
    ReconParams p;
    p.epsilon = resolve(o_eps, epsilon, cfg, "recon", "epsilon");
    p.jump_radius = resolve_i(o_jump, jump_radius, cfg, "recon", "jump_radius");
    p.min_component_voxels = resolve_i(o_min, min_size, cfg, "recon", "min_component_voxels");
    p.validate();
    return p;
  }

  json echo(const ReconParams& p) const {
    json j;
    j["epsilon"] = std::isinf(p.epsilon) ? json("inf") : json(p.epsilon);
    j["jump_radius"] = p.jump_radius;
    j["min_component_voxels"] = p.min_component_voxels;
    return j;
  }
};

struct EvalFlags {
  double dmax = 5.0;
  double margin = 2.0;
  std::string matching = "greedy";
  CLI::Option *o_dmax, *o_margin, *o_matching;

  void add(CLI::App* cmd) {
    o_dmax = cmd->add_option("--dmax", dmax, "terminal pairing cutoff (um)");
    o_margin = cmd->add_option("--margin", margin, "boundary margin for terminals (um)");
    o_matching = cmd->add_option("--matching", matching, "greedy|optimal terminal matching");
  }

  double resolved_dmax(const TomlConfig& cfg) const {
    return resolve(o_dmax, dmax, cfg, "eval", "dmax");
  }
  double resolved_margin(const TomlConfig& cfg) const {
    return resolve(o_margin, margin, cfg, "eval", "margin");
  }
  Matching resolved_matching(const TomlConfig& cfg) const {
    std::string m = matching;
    if (o_matching->count() == 0)
      m = cfg.get_string("eval", "matching").value_or(matching);
    return parse_matching(m);
  }
};

struct LossFlags {
  double delta_v = 0.5;
  double delta_d = 1.5;
  double alpha = 1.0, beta = 1.0, gamma = 0.1, eta = 0.001, xi = 1.0;
  std::int64_t patch_size = 32;
  std::int64_t stride = 16;
  CLI::Option *o_dv, *o_dd, *o_a, *o_b, *o_g, *o_e, *o_x, *o_ps, *o_st;

  void add(CLI::App* cmd) {
    o_dv = cmd->add_option("--delta-v", delta_v, "intra-cluster margin");
    o_dd = cmd->add_option("--delta-d", delta_d, "inter-cluster margin");
    o_a = cmd->add_option("--alpha", alpha, "variance weight");
    o_b = cmd->add_option("--beta", beta, "distance weight");
    o_g = cmd->add_option("--gamma", gamma, "continuity weight");
    o_e = cmd->add_option("--eta", eta, "regularization weight");
    o_x = cmd->add_option("--xi", xi, "BCE weight");
    o_ps = cmd->add_option("--patch-size", patch_size, "overlap patch edge (voxels)");
    o_st = cmd->add_option("--stride", stride, "overlap patch stride (voxels)");
  }

  Margins margins(const TomlConfig& cfg) const {
    Margins m;
    m.delta_v = resolve(o_dv, delta_v, cfg, "loss", "delta_v");
    m.delta_d = resolve(o_dd, delta_d, cfg, "loss", "delta_d");
    m.validate();
    return m;
  }
  LossWeights weights(const TomlConfig& cfg) const {
    LossWeights w;
    w.alpha = resolve(o_a, alpha, cfg, "loss", "alpha");
    w.beta = resolve(o_b, beta, cfg, "loss", "beta");
    w.gamma = resolve(o_g, gamma, cfg, "loss", "gamma");
    w.eta = resolve(o_e, eta, cfg, "loss", "eta");
    w.xi = resolve(o_x, xi, cfg, "loss", "xi");
    w.validate();
    return w;
  }
  Vec3i patch(const TomlConfig& cfg) const {
    const index_t p = resolve_i(o_ps, patch_size, cfg, "loss", "patch_size");
    return Vec3i(p, p, p);
  }
  Vec3i stride3(const TomlConfig& cfg) const {
    const index_t s = resolve_i(o_st, stride, cfg, "loss", "stride");
    return Vec3i(s, s, s);
  }
  json echo(const Margins& m, const LossWeights& w, const Vec3i& ps, const Vec3i& st) const {
    json j;
    j["delta_v"] = m.delta_v;
    j["delta_d"] = m.delta_d;
    j["alpha"] = w.alpha;
    j["beta"] = w.beta;
    j["gamma"] = w.gamma;
    j["eta"] = w.eta;
    j["xi"] = w.xi;
    j["patch_size"] = ps[0];
    j["stride"] = st[0];
    return j;
  }
};

void write_phantom_artifacts(const std::string& out_dir, const PhantomSpec& spec,
                             const PhantomResult& ph, const Field3<float>& field,
                             const json& config_echo) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  SwcForest gt = ph.gt;
  gt.set_header_comments({std::string("# ") + kToolName + " " + kToolVersion + " phantom",
                          "# seed=" + std::to_string(spec.seed)});
  write_swc_file(gt, (dir / "gt.swc").string());

  const json prov = provenance_json("phantom", config_echo, {});
  write_volume((dir / "labels.json").string(), ph.labels, prov);
  write_volume((dir / "mask.json").string(), ph.mask, prov);
  write_volume((dir / "field.json").string(), field, prov);

  json rep;
  rep["spec"] = config_echo;
  rep["crossing_clusters"] = ph.crossing_clusters;
  rep["overlap_voxels"] = ph.raster.overlap_voxels.size();
  rep["clipped_nodes"] = ph.raster.clipped_nodes.size();
  rep["placement_failure"] = ph.placement_failure;
  rep["nodes"] = ph.gt.size();
  rep["provenance"] = prov;
  write_json_file((dir / "phantom_report.json").string(), rep);
}

// ---------------------------------------------------------------- commands

int cmd_phantom(Common& common, const PhantomFlags& pf, const std::string& out_dir) {
  const PhantomSpec spec = pf.spec(common.cfg);
  const PhantomResult ph = gen_phantom(spec);
  const Field3<float> field = oracle_embedding(ph.labels, spec.embed_dim, spec.separation,
                                               spec.noise_sigma, spec.seed ^ 0x9e3779b97f4a7c15ull);
  write_phantom_artifacts(out_dir, spec, ph, field, pf.echo(spec));
  if (ph.placement_failure)
    std::cerr << "phantom: warning: crossing target not met (got "
              << ph.crossing_clusters << ")\n";
  return 0;
}

int cmd_rasterize(const std::string& swc_path, const std::string& dims,
                  const std::string& voxel_size, bool per_component,
                  const std::string& out_path, const std::string& report_path) {
  const SwcForest forest = read_swc_file(swc_path);
  const GridDims grid = parse_dims(dims, voxel_size);
  RasterReport rep;
  const LabelVolume labels = rasterize(forest, grid, per_component, &rep);

  json cfg;
  cfg["swc"] = swc_path;
  cfg["dims"] = {grid.d, grid.h, grid.w};
  cfg["per_component"] = per_component;
  const json prov =
      provenance_json("rasterize", cfg, {{swc_path, digest_hex(fnv1a64_file(swc_path))}});
  write_volume(out_path, labels, prov);

  if (!report_path.empty()) {
    json j;
    j["overlap_voxels"] = rep.overlap_voxels.size();
    j["crossing_clusters"] = rep.crossing_clusters;
    j["clipped_nodes"] = rep.clipped_nodes;
    j["empty_forest"] = rep.empty_forest;
    j["provenance"] = prov;
    write_json_file(report_path, j);
  }
  if (rep.empty_forest) std::cerr << "rasterize: warning: empty forest, all-zero volume\n";
  return 0;
}

int cmd_loss(Common& common, const LossFlags& lf, const std::string& field_path,
             const std::string& labels_path, const std::string& mask_path,
             const std::string& probs_path, const std::string& out_path,
             const std::string& grad_field_path, const std::string& grad_probs_path) {
  const Margins margins = lf.margins(common.cfg);
  const LossWeights weights = lf.weights(common.cfg);
  const Vec3i patch = lf.patch(common.cfg);
  const Vec3i stride = lf.stride3(common.cfg);

  const Field3<float> field = read_field(field_path);
  const LabelVolume labels = read_labels(labels_path);
  const VoxelMask mask = read_mask(mask_path);
  std::optional<Field3<float>> probs;
  if (!probs_path.empty()) probs = read_field(probs_path);

  const auto patches = find_overlap_patches(labels, patch, stride);

  std::map<std::string, std::string> digests = {
      {field_path, digest_hex(fnv1a64_file(field_path))},
      {labels_path, digest_hex(fnv1a64_file(labels_path))},
      {mask_path, digest_hex(fnv1a64_file(mask_path))}};
  if (!probs_path.empty()) digests[probs_path] = digest_hex(fnv1a64_file(probs_path));
  const json prov = provenance_json("loss", lf.echo(margins, weights, patch, stride), digests);

  json out;
  if (grad_field_path.empty() && grad_probs_path.empty()) {
    const LossBreakdown b = total_loss(field, labels, probs ? &*probs : nullptr, mask, patches,
                                       margins, weights, common.threads);
    out = breakdown_json(b);
  } else {
    const auto g = grad_total_loss(field, labels, probs ? &*probs : nullptr, mask, patches,
                                   margins, weights, 1e-3, common.threads);
    out = breakdown_json(g.value);
    if (!grad_field_path.empty()) write_volume(grad_field_path, g.field, prov);
    if (!grad_probs_path.empty() && probs) write_volume(grad_probs_path, g.probabilities, prov);
  }
  out["provenance"] = prov;
  write_json_file(out_path, out);
  std::cout << "total = " << out["total"] << "\n";
  return 0;
}

int cmd_grad_check(Common& common, const LossFlags& lf, std::int64_t extent,
                   std::int64_t channels, std::int64_t trials, std::uint64_t seed, double step,
                   double kink_tol, double tol, const std::string& out_path) {
  const Margins margins = lf.margins(common.cfg);
  const LossWeights weights = lf.weights(common.cfg);

  Rng rng(seed);
  double worst = 0.0;
  index_t checked = 0, skipped = 0;

  for (std::int64_t trial = 0; trial < trials; ++trial) {
    GridDims dims;
    dims.d = dims.h = dims.w = extent;
    dims.voxel_size = Vec3d::Ones();
    Field3<double> field(dims, channels);
    LabelVolume labels(dims, 0);
    VoxelMask mask(dims, 0);
    Field3<double> probs(dims, 1);
    for (index_t v = 0; v < dims.nvox(); ++v) {
      if (rng.uniform() < 0.6) {
        labels[v] = static_cast<std::uint32_t>(rng.uniform_int(1, 3));
        mask[v] = 1;
      }
      probs.data[static_cast<std::size_t>(v)] = rng.uniform(0.05, 0.95);
      for (index_t c = 0; c < channels; ++c)
        field.data[static_cast<std::size_t>(c * dims.nvox() + v)] = rng.uniform(-2.0, 2.0);
    }
    const index_t half = std::max<index_t>(2, extent / 2);
    const auto patches =
        find_overlap_patches(labels, Vec3i(half, half, half), Vec3i(half, half, half));
    const auto grad = grad_total_loss(field, labels, &probs, mask, patches, margins, weights,
                                      kink_tol, common.threads);
    for (index_t c = 0; c < channels; ++c)
      for (index_t v = 0; v < dims.nvox(); ++v) {
        if (grad.field_kink[static_cast<std::size_t>(v)]) {
          ++skipped;
          continue;
        }
        const std::size_t idx = static_cast<std::size_t>(c * dims.nvox() + v);
        const double saved = field.data[idx];
        field.data[idx] = saved + step;
        const double up =
            total_loss(field, labels, &probs, mask, patches, margins, weights).total;
        field.data[idx] = saved - step;
        const double dn =
            total_loss(field, labels, &probs, mask, patches, margins, weights).total;
        field.data[idx] = saved;
        const double fd = (up - dn) / (2.0 * step);
        const double a = grad.field.data[idx];
        worst = std::max(worst, std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)}));
        ++checked;
      }
  }

  const bool pass = worst <= tol;
  json j;
  j["max_relative_error"] = worst;
  j["tolerance"] = tol;
  j["checked_coordinates"] = checked;
  j["skipped_near_kinks"] = skipped;
  j["step"] = step;
  j["kink_tol"] = kink_tol;
  j["trials"] = trials;
  j["pass"] = pass;
  if (!out_path.empty()) write_json_file(out_path, j);
  std::cout << (pass ? "PASS" : "FAIL") << " max_rel=" << worst << " checked=" << checked
            << " skipped=" << skipped << "\n";
  return pass ? 0 : 1;
}

int cmd_reconstruct(Common& common, const ReconFlags& rf, const std::string& mask_path,
                    const std::string& field_path, const std::string& out_path,
                    const std::string& report_path) {
  const ReconParams params = rf.params(common.cfg);
  const VoxelMask mask = read_mask(mask_path);
  const Field3<float> field = read_field(field_path);

  ReconReport rep;
  SwcForest forest = reconstruct(mask, field, params, &rep, common.threads);

  const std::string mask_digest = digest_hex(fnv1a64_file(mask_path));
  const std::string field_digest = digest_hex(fnv1a64_file(field_path));
  const std::string eps =
      std::isinf(params.epsilon) ? "inf" : std::to_string(params.epsilon);
  forest.set_header_comments(
      {std::string("# ") + kToolName + " " + kToolVersion + " reconstruct",
       "# epsilon=" + eps + " jump_radius=" + std::to_string(params.jump_radius) +
           " min_component_voxels=" + std::to_string(params.min_component_voxels),
       "# input mask=" + mask_digest + " field=" + field_digest});
  write_swc_file(forest, out_path);

  if (!report_path.empty()) {
    json j = recon_report_json(rep);
    j["components"] = forest_components(forest).size();
    j["provenance"] =
        provenance_json("reconstruct", rf.echo(params),
                        {{mask_path, mask_digest}, {field_path, field_digest}});
    write_json_file(report_path, j);
  }
  return 0;
}

int cmd_eval_connectivity(Common& common, const EvalFlags& ef, const std::string& gt_path,
                          const std::string& pred_path, const std::string& gt_dir,
                          const std::string& pred_dir, const std::string& bbox_text,
                          const std::string& out_path) {
  const double dmax = ef.resolved_dmax(common.cfg);
  const double margin = ef.resolved_margin(common.cfg);
  const Matching matching = ef.resolved_matching(common.cfg);

  json cfg;
  cfg["dmax"] = dmax;
  cfg["margin"] = margin;
  cfg["matching"] = matching == Matching::Greedy ? "greedy" : "optimal";

  auto eval_one = [&](const std::string& g, const std::string& p) {
    const SwcForest gt = read_swc_file(g);
    const SwcForest pred = read_swc_file(p);
    Box3 box;
    if (!bbox_text.empty()) {
      const auto v = parse_csv_reals(bbox_text, 6, "--bbox");
      box.lo = Vec3d(v[0], v[1], v[2]);
      box.hi = Vec3d(v[3], v[4], v[5]);
    } else {
      box = forest_bbox(gt, pred);
      for (int a = 0; a < 3; ++a)  // guard planar/point forests
        if (box.hi[a] - box.lo[a] <= 0.0) {
          box.lo[a] -= 1.0;
          box.hi[a] += 1.0;
        }
    }
    return evaluate_connectivity(gt, pred, box, margin, dmax, matching);
  };

  if (gt_dir.empty()) {
    const auto [pairing, rep] = eval_one(gt_path, pred_path);
    json j = connectivity_json(rep, pairing);
    j["provenance"] =
        provenance_json("eval-connectivity", cfg,
                        {{gt_path, digest_hex(fnv1a64_file(gt_path))},
                         {pred_path, digest_hex(fnv1a64_file(pred_path))}});
    write_json_file(out_path, j);
    std::cout << "correct=" << rep.correct << " type1=" << rep.type1
              << " type2=" << rep.type2 << "\n";
    return 0;
  }

  // batch mode: pair files by name across the two directories
  std::vector<fs::path> gts;
  for (const auto& e : fs::directory_iterator(gt_dir))
    if (e.path().extension() == ".swc") gts.push_back(e.path());
  std::sort(gts.begin(), gts.end());
  if (gts.empty())
    throw Error(ErrorCode::InvalidConfig, "eval-connectivity: no .swc files in " + gt_dir);

  double sum_correct = 0, sum_t1 = 0, sum_t2 = 0;
  json per_file = json::array();
  for (const fs::path& g : gts) {
    const fs::path p = fs::path(pred_dir) / g.filename();
    if (!fs::exists(p))
      throw Error(ErrorCode::InvalidConfig,
                  "eval-connectivity: missing prediction " + p.string());
    const auto [pairing, rep] = eval_one(g.string(), p.string());
    sum_correct += static_cast<double>(rep.correct);
    sum_t1 += static_cast<double>(rep.type1);
    sum_t2 += static_cast<double>(rep.type2);
    json e = connectivity_json(rep, pairing);
    e["file"] = g.filename().string();
    per_file.push_back(e);
  }
  const double n = static_cast<double>(gts.size());
  json agg;  // Table-2 column schema: per-block means, ratios of the means
  agg["blocks"] = gts.size();
  agg["correct"] = sum_correct / n;
  agg["type1"] = sum_t1 / n;
  agg["type2"] = sum_t2 / n;
  agg["type1_over_correct"] = sum_correct > 0 ? json(sum_t1 / sum_correct) : json(nullptr);
  agg["type2_over_correct"] = sum_correct > 0 ? json(sum_t2 / sum_correct) : json(nullptr);
  agg["per_file"] = per_file;
  agg["provenance"] = provenance_json("eval-connectivity", cfg, {});
  write_json_file(out_path, agg);
  std::cout << "blocks=" << gts.size() << " mean correct=" << agg["correct"]
            << " mean type1=" << agg["type1"] << " mean type2=" << agg["type2"] << "\n";
  return 0;
}

int cmd_eval_seg(const std::string& pred_path, const std::string& gt_path,
                 const std::string& out_path) {
  const VoxelMask pred = read_mask(pred_path);
  const VoxelMask truth = read_mask(gt_path);
  if (!pred.dims.same_extents(truth.dims))
    throw Error(ErrorCode::ShapeMismatch,
                "eval-seg: dims differ between " + pred_path + " and " + gt_path);
  const SegMetrics m = seg_metrics(pred, truth);
  json j = seg_metrics_json(m);
  j["provenance"] = provenance_json("eval-seg", json::object(),
                                    {{pred_path, digest_hex(fnv1a64_file(pred_path))},
                                     {gt_path, digest_hex(fnv1a64_file(gt_path))}});
  write_json_file(out_path, j);
  std::cout << "dice=" << m.dice << " iou=" << m.iou << "\n";
  return 0;
}

int cmd_pipeline(Common& common, const PhantomFlags& pf, const ReconFlags& rf,
                 const EvalFlags& ef, const std::string& out_dir) {
  PipelineConfig cfg;
  cfg.phantom = pf.spec(common.cfg);
  cfg.recon = rf.params(common.cfg);
  cfg.d_max = ef.resolved_dmax(common.cfg);
  cfg.terminal_margin = ef.resolved_margin(common.cfg);
  cfg.matching = ef.resolved_matching(common.cfg);
  cfg.threads = common.threads;

  const PipelineResult r = run_pipeline(cfg);

  json config_echo;
  config_echo["phantom"] = pf.echo(cfg.phantom);
  config_echo["recon"] = rf.echo(cfg.recon);
  config_echo["dmax"] = cfg.d_max;
  config_echo["margin"] = cfg.terminal_margin;
  config_echo["matching"] = cfg.matching == Matching::Greedy ? "greedy" : "optimal";

  write_phantom_artifacts(out_dir, cfg.phantom, r.phantom, r.field, config_echo["phantom"]);

  const fs::path dir(out_dir);
  SwcForest pred = r.reconstructed;
  const std::string eps =
      std::isinf(cfg.recon.epsilon) ? "inf" : std::to_string(cfg.recon.epsilon);
  pred.set_header_comments(
      {std::string("# ") + kToolName + " " + kToolVersion + " pipeline",
       "# epsilon=" + eps + " jump_radius=" + std::to_string(cfg.recon.jump_radius) +
           " min_component_voxels=" + std::to_string(cfg.recon.min_component_voxels),
       "# phantom seed=" + std::to_string(cfg.phantom.seed)});
  write_swc_file(pred, (dir / "recon.swc").string());

  json rep;
  rep["phantom"] = {{"crossing_clusters", r.phantom.crossing_clusters},
                    {"placement_failure", r.phantom.placement_failure},
                    {"gt_nodes", r.phantom.gt.size()}};
  rep["recon"] = recon_report_json(r.recon_report);
  rep["recon"]["components"] = forest_components(r.reconstructed).size();
  rep["connectivity"] = connectivity_json(r.connectivity, r.pairing);
  rep["provenance"] = provenance_json("pipeline", config_echo, {});
  write_json_file((dir / "report.json").string(), rep);

  std::cout << "correct=" << r.connectivity.correct << " type1=" << r.connectivity.type1
            << " type2=" << r.connectivity.type2 << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) +
               " - neuron skeleton reconstruction from voxel embeddings"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config_path, "TOML config file (flags take precedence)")
      ->check(CLI::ExistingFile);
  app.add_option("--threads", common.threads, "worker thread cap")
      ->envname("NEURITE_RECON_THREADS");

  // phantom
  auto* sc_phantom = app.add_subcommand("phantom", "generate a synthetic tube phantom");
  PhantomFlags pf_phantom;
  pf_phantom.add(sc_phantom);
  std::string phantom_out;
  sc_phantom->add_option("-o,--out", phantom_out, "output directory")->required();

  // rasterize
  auto* sc_raster = app.add_subcommand("rasterize", "rasterize an SWC file to a label volume");
  std::string raster_swc, raster_dims = "128", raster_voxel = "1", raster_out, raster_report;
  bool raster_per_component = false;
  sc_raster->add_option("--swc", raster_swc, "input SWC file")->required();
  sc_raster->add_option("--dims", raster_dims, "grid extents d[,h,w]");
  sc_raster->add_option("--voxel-size", raster_voxel, "voxel size sz[,sy,sx] um");
  sc_raster->add_flag("--per-component", raster_per_component, "one label per component");
  sc_raster->add_option("-o,--out", raster_out, "output labels volume (.json)")->required();
  sc_raster->add_option("--report", raster_report, "rasterization report (.json)");

  // loss
  auto* sc_loss = app.add_subcommand("loss", "evaluate the discriminative loss");
  LossFlags lf_loss;
  lf_loss.add(sc_loss);
  std::string loss_field, loss_labels, loss_mask, loss_probs, loss_out, loss_grad_field,
      loss_grad_probs;
  sc_loss->add_option("--field", loss_field, "embedding field volume")->required();
  sc_loss->add_option("--labels", loss_labels, "instance label volume")->required();
  sc_loss->add_option("--mask", loss_mask, "foreground mask volume")->required();
  sc_loss->add_option("--probs", loss_probs, "predicted probability volume (enables BCE)");
  sc_loss->add_option("-o,--out", loss_out, "loss breakdown report (.json)")->required();
  sc_loss->add_option("--grad-out", loss_grad_field, "write d(total)/d(field) volume");
  sc_loss->add_option("--grad-probs-out", loss_grad_probs, "write d(total)/d(probs) volume");

  // grad-check
  auto* sc_grad =
      app.add_subcommand("grad-check", "finite-difference check of the analytic gradient");
  LossFlags lf_grad;
  lf_grad.add(sc_grad);
  std::int64_t gc_extent = 6, gc_channels = 4, gc_trials = 3;
  std::uint64_t gc_seed = 1;
  double gc_step = 1e-4, gc_kink = 1e-3, gc_tol = 1e-5;
  std::string gc_out;
  sc_grad->add_option("--extent", gc_extent, "random instance edge length");
  sc_grad->add_option("--channels", gc_channels, "embedding channels");
  sc_grad->add_option("--trials", gc_trials, "number of random instances");
  sc_grad->add_option("--seed", gc_seed, "rng seed");
  sc_grad->add_option("--step", gc_step, "central difference step");
  sc_grad->add_option("--kink-tol", gc_kink, "hinge-argument exclusion band");
  sc_grad->add_option("--tol", gc_tol, "max allowed relative error");
  sc_grad->add_option("-o,--out", gc_out, "report file (.json)");

  // reconstruct
  auto* sc_recon =
      app.add_subcommand("reconstruct", "mask + embedding field -> SWC skeleton forest");
  ReconFlags rf_recon;
  rf_recon.add(sc_recon);
  std::string recon_mask, recon_field, recon_out, recon_report;
  sc_recon->add_option("--mask", recon_mask, "foreground mask volume")->required();
  sc_recon->add_option("--field", recon_field, "embedding field volume")->required();
  sc_recon->add_option("-o,--out", recon_out, "output SWC path")->required();
  sc_recon->add_option("--report", recon_report, "run report (.json)");

  // eval-connectivity
  auto* sc_conn = app.add_subcommand("eval-connectivity",
                                     "Type I/II connectivity evaluation of SWC forests");
  EvalFlags ef_conn;
  ef_conn.add(sc_conn);
  std::string conn_gt, conn_pred, conn_gt_dir, conn_pred_dir, conn_bbox, conn_out;
  sc_conn->add_option("--gt", conn_gt, "ground-truth SWC");
  sc_conn->add_option("--pred", conn_pred, "predicted SWC");
  sc_conn->add_option("--gt-dir", conn_gt_dir, "directory of ground-truth SWC files");
  sc_conn->add_option("--pred-dir", conn_pred_dir, "directory of predicted SWC files");
  sc_conn->add_option("--bbox", conn_bbox, "x0,y0,z0,x1,y1,z1 um (default: union bbox)");
  sc_conn->add_option("-o,--out", conn_out, "report file (.json)")->required();

  // eval-seg
  auto* sc_seg = app.add_subcommand("eval-seg", "segmentation overlap metrics for masks");
  std::string seg_pred, seg_gt, seg_out;
  sc_seg->add_option("--pred", seg_pred, "predicted mask volume")->required();
  sc_seg->add_option("--gt", seg_gt, "ground-truth mask volume")->required();
  sc_seg->add_option("-o,--out", seg_out, "metrics file (.json)")->required();

  // pipeline
  auto* sc_pipe = app.add_subcommand("pipeline",
                                     "phantom -> reconstruct -> eval-connectivity in one run");
  PhantomFlags pf_pipe;
  pf_pipe.add(sc_pipe);
  ReconFlags rf_pipe;
  rf_pipe.add(sc_pipe);
  EvalFlags ef_pipe;
  ef_pipe.add(sc_pipe);
  std::string pipe_out;
  sc_pipe->add_option("-o,--out", pipe_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    common.load();
    if (common.threads < 1)
      throw Error(ErrorCode::InvalidConfig, "--threads: must be >= 1");

    if (sc_phantom->parsed()) return cmd_phantom(common, pf_phantom, phantom_out);
    if (sc_raster->parsed())
      return cmd_rasterize(raster_swc, raster_dims, raster_voxel, raster_per_component,
                           raster_out, raster_report);
    if (sc_loss->parsed())
      return cmd_loss(common, lf_loss, loss_field, loss_labels, loss_mask, loss_probs,
                      loss_out, loss_grad_field, loss_grad_probs);
    if (sc_grad->parsed())
      return cmd_grad_check(common, lf_grad, gc_extent, gc_channels, gc_trials, gc_seed,
                            gc_step, gc_kink, gc_tol, gc_out);
    if (sc_recon->parsed())
      return cmd_reconstruct(common, rf_recon, recon_mask, recon_field, recon_out,
                             recon_report);
    if (sc_conn->parsed()) {
      if (conn_gt_dir.empty() != conn_pred_dir.empty())
        throw Error(ErrorCode::InvalidConfig,
                    "eval-connectivity: --gt-dir and --pred-dir go together");
      if (conn_gt_dir.empty() && (conn_gt.empty() || conn_pred.empty()))
        throw Error(ErrorCode::InvalidConfig,
                    "eval-connectivity: need --gt/--pred or --gt-dir/--pred-dir");
      return cmd_eval_connectivity(common, ef_conn, conn_gt, conn_pred, conn_gt_dir,
                                   conn_pred_dir, conn_bbox, conn_out);
    }
    if (sc_seg->parsed()) return cmd_eval_seg(seg_pred, seg_gt, seg_out);
    if (sc_pipe->parsed()) return cmd_pipeline(common, pf_pipe, rf_pipe, ef_pipe, pipe_out);
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Validation ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
