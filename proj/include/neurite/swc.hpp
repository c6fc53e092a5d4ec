#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "neurite/error.hpp"
#include "neurite/types.hpp"

namespace neurite {

// One SWC record: id type x y z radius parent. Coordinates and radius are
// micrometers; parent -1 marks a root.
struct SwcNode {
  std::int64_t id = 0;
  int type_code = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double radius = 0.0;
  std::int64_t parent = -1;

  Vec3d pos() const { return Vec3d(x, y, z); }
};

// Node-indexed skeleton forest. Immutable after construction; parent links
// form a forest (no cycles), children_index is the inverse relation.
class SwcForest {
 public:
  SwcForest() = default;

  // Validates ids, parent references and acyclicity; preserves node order.
  // Forward parent references are allowed.
  static SwcForest from_nodes(std::vector<SwcNode> nodes,
                              std::vector<std::string> header_comments = {});

  const std::vector<SwcNode>& nodes() const { return nodes_; }
  const std::vector<std::string>& header_comments() const { return header_comments_; }
  void set_header_comments(std::vector<std::string> c) { header_comments_ = std::move(c); }

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }

  bool has_id(std::int64_t id) const { return index_of_.count(id) != 0; }
  const SwcNode& node(std::int64_t id) const { return nodes_[index_of_.at(id)]; }

  // child ids in node order; empty vector for leaves
  const std::vector<std::int64_t>& children(std::int64_t id) const;

  std::vector<std::int64_t> root_ids() const;

 private:
  std::vector<SwcNode> nodes_;
  std::vector<std::string> header_comments_;
  std::unordered_map<std::int64_t, std::size_t> index_of_;
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> children_;
};

// Parses SWC text. '#' lines are comments (leading header block is kept for
// re-emission), blank lines allowed. Errors name the offending line or id.
SwcForest parse_swc(std::istream& in);
SwcForest parse_swc_string(const std::string& text);
SwcForest read_swc_file(const std::string& path);

// Emits one record per node, parents before children (topological order),
// reals printed shortest-round-trip so parse(write(f)) is the identity.
// Header comments are written first.
std::string write_swc(const SwcForest& forest);
void write_swc_file(const SwcForest& forest, const std::string& path);

// Terminal nodes: leaves, roots with <= 1 child, and nodes within `margin`
// um of any face of `bbox`. Sorted ascending. Throws DegenerateBox.
std::vector<std::int64_t> terminals(const SwcForest& forest, const Box3& bbox,
                                    double margin);

// Connected components (trees) of the forest. Groups are ordered by first
// node appearance; each group lists node ids in node order.
std::vector<std::vector<std::int64_t>> forest_components(const SwcForest& forest);

// Component index (0-based, same order as forest_components) per node id.
std::unordered_map<std::int64_t, std::size_t> component_of_node(const SwcForest& forest);

// Union bounding box of node coordinates of both forests (um).
Box3 forest_bbox(const SwcForest& a, const SwcForest& b);

}  // namespace neurite
