#include "neurite/pipeline.hpp"

namespace neurite {

std::pair<TerminalPairing, ConnectivityReport> evaluate_connectivity(
    const SwcForest& gt, const SwcForest& pred, const Box3& bbox, double margin,
    double d_max, Matching matching) {
  const auto gt_terms = terminals(gt, bbox, margin);
  const auto pred_terms = pred.empty() ? std::vector<std::int64_t>{}
                                       : terminals(pred, bbox, margin);
  TerminalPairing pairing = pair_terminals(gt, gt_terms, pred, pred_terms, d_max, matching);
  ConnectivityReport report = classify_connectivity(gt, pred, pairing);
  return {std::move(pairing), std::move(report)};
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.phantom.validate();
  config.recon.validate();

  PipelineResult r;
  r.phantom = gen_phantom(config.phantom);
  r.field = oracle_embedding(r.phantom.labels, config.phantom.embed_dim,
                             config.phantom.separation, config.phantom.noise_sigma,
                             config.phantom.seed ^ 0x9e3779b97f4a7c15ull);
  r.reconstructed = reconstruct(r.phantom.mask, r.field, config.recon, &r.recon_report,
                                config.threads);

  const Box3 bbox = volume_box_um(config.phantom.dims);
  auto [pairing, report] =
      evaluate_connectivity(r.phantom.gt, r.reconstructed, bbox, config.terminal_margin,
                            config.d_max, config.matching);
  r.pairing = std::move(pairing);
  r.connectivity = std::move(report);
  return r;
}

}  // namespace neurite
