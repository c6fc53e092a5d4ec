#include "neurite/conn_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace neurite {

namespace {

struct Candidate {
  double distance;
  std::int64_t gt_id;
  std::int64_t pred_id;
};

std::vector<Candidate> candidates_within(const SwcForest& gt,
                                         const std::vector<std::int64_t>& gt_terms,
                                         const SwcForest& pred,
                                         const std::vector<std::int64_t>& pred_terms,
                                         double d_max) {
  std::vector<Candidate> cand;
  for (std::int64_t g : gt_terms) {
    const Vec3d pg = gt.node(g).pos();
    for (std::int64_t p : pred_terms) {
      const double d = (pg - pred.node(p).pos()).norm();
      if (d <= d_max) cand.push_back({d, g, p});
    }
  }
  return cand;
}

TerminalPairing greedy_matching(const SwcForest& gt, const std::vector<std::int64_t>& gt_terms,
                                const SwcForest& pred,
                                const std::vector<std::int64_t>& pred_terms, double d_max) {
  auto cand = candidates_within(gt, gt_terms, pred, pred_terms, d_max);
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.gt_id != b.gt_id) return a.gt_id < b.gt_id;
    return a.pred_id < b.pred_id;
  });

  TerminalPairing out;
  out.d_max = d_max;
  std::unordered_set<std::int64_t> used_gt, used_pred;
  for (const Candidate& c : cand) {
    if (used_gt.count(c.gt_id) || used_pred.count(c.pred_id)) continue;
    used_gt.insert(c.gt_id);
    used_pred.insert(c.pred_id);
    out.pairs.push_back({c.gt_id, c.pred_id, c.distance});
  }
  for (std::int64_t g : gt_terms)
    if (!used_gt.count(g)) out.unmatched_gt.push_back(g);
  for (std::int64_t p : pred_terms)
    if (!used_pred.count(p)) out.unmatched_pred.push_back(p);
  return out;
}

// Maximum-cardinality, minimum-total-distance assignment via successive
// shortest augmenting paths (Jonker-Volgenant style). Forbidden pairs
// (distance > d_max) carry a large penalty; rows that end on a penalty edge
// are treated as unmatched. Suitable for the small terminal sets the
// connectivity metric works with.
TerminalPairing optimal_matching(const SwcForest& gt, const std::vector<std::int64_t>& gt_terms,
                                 const SwcForest& pred,
                                 const std::vector<std::int64_t>& pred_terms, double d_max) {
  const std::size_t nr = gt_terms.size(), nc = pred_terms.size();
  TerminalPairing out;
  out.d_max = d_max;
  if (nr == 0 || nc == 0) {
    out.unmatched_gt = gt_terms;
    out.unmatched_pred = pred_terms;
    return out;
  }

  // pad to a square matrix; kForbidden makes unmatchable pairs unattractive
  const std::size_t n = std::max(nr, nc);
  const double kForbidden = 1e9;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, kForbidden));
  for (std::size_t i = 0; i < nr; ++i) {
    const Vec3d pg = gt.node(gt_terms[i]).pos();
    for (std::size_t j = 0; j < nc; ++j) {
      const double d = (pg - pred.node(pred_terms[j]).pos()).norm();
      if (d <= d_max) cost[i][j] = d;
    }
  }

  // Hungarian algorithm (O(n^3)), potentials u/v, row match in way[]
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = std::numeric_limits<double>::infinity();
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::unordered_set<std::int64_t> used_gt, used_pred;
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j];
    if (i == 0 || i > nr || j > nc) continue;
    if (cost[i - 1][j - 1] >= kForbidden) continue;  // padded or out of reach
    out.pairs.push_back({gt_terms[i - 1], pred_terms[j - 1], cost[i - 1][j - 1]});
    used_gt.insert(gt_terms[i - 1]);
    used_pred.insert(pred_terms[j - 1]);
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const TerminalPair& a, const TerminalPair& b) {
    return a.gt_id < b.gt_id;
  });
  for (std::int64_t g : gt_terms)
    if (!used_gt.count(g)) out.unmatched_gt.push_back(g);
  for (std::int64_t pr : pred_terms)
    if (!used_pred.count(pr)) out.unmatched_pred.push_back(pr);
  return out;
}

}  // namespace

TerminalPairing pair_terminals(const SwcForest& gt, const std::vector<std::int64_t>& gt_terms,
                               const SwcForest& pred,
                               const std::vector<std::int64_t>& pred_terms, double d_max,
                               Matching matching) {
  if (!(d_max >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "pair_terminals: d_max must be >= 0");
  return matching == Matching::Greedy
             ? greedy_matching(gt, gt_terms, pred, pred_terms, d_max)
             : optimal_matching(gt, gt_terms, pred, pred_terms, d_max);
}

ConnectivityReport classify_connectivity(const SwcForest& gt, const SwcForest& pred,
                                         const TerminalPairing& pairing) {
  ConnectivityReport rep;
  if (pairing.pairs.empty()) {
    rep.empty_pairing = true;
    return rep;
  }

  const auto gt_comp = component_of_node(gt);
  const auto pred_comp = component_of_node(pred);
  const std::size_t n_gt = forest_components(gt).size();
  const std::size_t n_pred = forest_components(pred).size();

  std::vector<std::set<std::size_t>> gt_spans(n_gt);    // predicted comps per GT comp
  std::vector<std::set<std::size_t>> pred_spans(n_pred);  // GT comps per predicted comp
  std::vector<std::size_t> gt_matched(n_gt, 0), pred_matched(n_pred, 0);

  for (const TerminalPair& pr : pairing.pairs) {
    const std::size_t g = gt_comp.at(pr.gt_id);
    const std::size_t q = pred_comp.at(pr.pred_id);
    gt_spans[g].insert(q);
    pred_spans[q].insert(g);
    gt_matched[g] += 1;
    pred_matched[q] += 1;
  }

  for (std::size_t g = 0; g < n_gt; ++g) {
    ComponentDetail d;
    d.component = g;
    d.matched_terminals = gt_matched[g];
    d.spans.assign(gt_spans[g].begin(), gt_spans[g].end());
    rep.gt_detail.push_back(std::move(d));
    if (gt_spans[g].size() > 1)
      rep.type1 += static_cast<index_t>(gt_spans[g].size()) - 1;
    if (gt_spans[g].size() == 1) {
      const std::size_t q = *gt_spans[g].begin();
      if (pred_spans[q].size() == 1) rep.correct += 1;
    }
  }
  for (std::size_t q = 0; q < n_pred; ++q) {
    ComponentDetail d;
    d.component = q;
    d.matched_terminals = pred_matched[q];
    d.spans.assign(pred_spans[q].begin(), pred_spans[q].end());
    rep.pred_detail.push_back(std::move(d));
    if (pred_spans[q].size() > 1)
      rep.type2 += static_cast<index_t>(pred_spans[q].size()) - 1;
  }

  if (rep.correct > 0) {
    rep.ratio1 = static_cast<double>(rep.type1) / static_cast<double>(rep.correct);
    rep.ratio2 = static_cast<double>(rep.type2) / static_cast<double>(rep.correct);
  }
  return rep;
}

SegMetrics seg_metrics(const VoxelMask& pred, const VoxelMask& truth) {
  if (!pred.dims.same_extents(truth.dims))
    throw Error(ErrorCode::ShapeMismatch, "seg_metrics: mask dims differ");

  index_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (index_t v = 0; v < pred.dims.nvox(); ++v) {
    const bool p = pred[v] != 0, t = truth[v] != 0;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
    tn += !p && !t;
  }

  SegMetrics m;
  const double total = static_cast<double>(tp + fp + fn + tn);
  m.accuracy = static_cast<double>(tp + tn) / total;

  const bool pred_empty = tp + fp == 0, truth_empty = tp + fn == 0;
  if (pred_empty && truth_empty) {
    m.precision = m.recall = m.f1 = m.dice = m.iou = 1.0;
    return m;
  }
  if (pred_empty || truth_empty) {
    m.precision = m.recall = m.f1 = m.dice = m.iou = 0.0;
    return m;
  }
  m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.dice = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  m.f1 = m.dice;  // identical from the same confusion counts
  m.iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
  return m;
}

}  // namespace neurite
