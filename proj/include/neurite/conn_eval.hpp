#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "neurite/grid.hpp"
#include "neurite/swc.hpp"

namespace neurite {

enum class Matching { Greedy, Optimal };

struct TerminalPair {
  std::int64_t gt_id = 0;
  std::int64_t pred_id = 0;
  double distance_um = 0.0;
};

struct TerminalPairing {
  std::vector<TerminalPair> pairs;
  std::vector<std::int64_t> unmatched_gt;
  std::vector<std::int64_t> unmatched_pred;
  double d_max = 0.0;
};

struct ComponentDetail {
  std::size_t component = 0;                 // component index in its forest
  std::vector<std::size_t> spans;            // counterpart components touched
  std::size_t matched_terminals = 0;
};

struct ConnectivityReport {
  index_t correct = 0;
  index_t type1 = 0;  // disconnections: one GT component split across predictions
  index_t type2 = 0;  // overconnections: one prediction covering several GT components
  std::optional<double> ratio1;  // type1/correct, defined when correct > 0
  std::optional<double> ratio2;
  std::vector<ComponentDetail> gt_detail;
  std::vector<ComponentDetail> pred_detail;
  bool empty_pairing = false;
};

struct SegMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double dice = 0.0;
  double iou = 0.0;
};

// One-to-one terminal matching with cutoff d_max. Greedy: all candidate
// pairs sorted by (distance, gt id, pred id), accepted when both endpoints
// are free. Optimal: maximum-cardinality minimum-total-distance assignment
// (for small instances).
TerminalPairing pair_terminals(const SwcForest& gt, const std::vector<std::int64_t>& gt_terms,
                               const SwcForest& pred,
                               const std::vector<std::int64_t>& pred_terms, double d_max,
                               Matching matching = Matching::Greedy);

// Type I: a GT component whose matched terminals span p > 1 predicted
// components adds p-1. Type II: a predicted component spanning r > 1 GT
// components adds r-1. Correct: bijectively corresponding components.
ConnectivityReport classify_connectivity(const SwcForest& gt, const SwcForest& pred,
                                         const TerminalPairing& pairing);

// Standard confusion-count metrics. When both masks are empty the overlap
// ratios are defined as 1, when exactly one is empty as 0.
SegMetrics seg_metrics(const VoxelMask& pred, const VoxelMask& truth);

}  // namespace neurite
