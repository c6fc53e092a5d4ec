#pragma once

#include "neurite/conn_eval.hpp"
#include "neurite/phantom.hpp"
#include "neurite/postprocess.hpp"

namespace neurite {

struct PipelineConfig {
  PhantomSpec phantom;
  ReconParams recon;
  double d_max = 5.0;            // terminal pairing cutoff, um
  double terminal_margin = 2.0;  // boundary margin for terminal extraction, um
  Matching matching = Matching::Greedy;
  int threads = 1;
};

struct PipelineResult {
  PhantomResult phantom;
  Field3<float> field;
  SwcForest reconstructed;
  ReconReport recon_report;
  TerminalPairing pairing;
  ConnectivityReport connectivity;
};

// phantom -> oracle embedding -> reconstruct -> eval-connectivity.
// Deterministic for a fixed config; the thread count never changes results.
PipelineResult run_pipeline(const PipelineConfig& config);

// Connectivity evaluation of a reconstruction against ground truth over a
// given bounding box (terminal extraction + pairing + classification).
std::pair<TerminalPairing, ConnectivityReport> evaluate_connectivity(
    const SwcForest& gt, const SwcForest& pred, const Box3& bbox, double margin,
    double d_max, Matching matching = Matching::Greedy);

}  // namespace neurite
