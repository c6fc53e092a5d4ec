#include "neurite/swc.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace neurite {

namespace {

const std::vector<std::int64_t> kNoChildren;

bool parse_int(const std::string& tok, std::int64_t& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_real(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

void append_real(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

}  // namespace

SwcForest SwcForest::from_nodes(std::vector<SwcNode> nodes,
                                std::vector<std::string> header_comments) {
  SwcForest f;
  f.nodes_ = std::move(nodes);
  f.header_comments_ = std::move(header_comments);
  f.index_of_.reserve(f.nodes_.size());

  for (std::size_t i = 0; i < f.nodes_.size(); ++i) {
    const SwcNode& n = f.nodes_[i];
    if (n.id <= 0)
      throw Error(ErrorCode::MalformedLine,
                  "swc: node id must be positive, got " + std::to_string(n.id));
    if (!(n.radius >= 0.0) || !std::isfinite(n.radius))
      throw Error(ErrorCode::MalformedLine,
                  "swc: node " + std::to_string(n.id) + ": radius must be >= 0");
    if (!f.index_of_.emplace(n.id, i).second)
      throw Error(ErrorCode::DuplicateId,
                  "swc: duplicate node id " + std::to_string(n.id));
  }
  for (const SwcNode& n : f.nodes_) {
    if (n.parent == -1) continue;
    if (!f.index_of_.count(n.parent))
      throw Error(ErrorCode::DanglingParent,
                  "swc: node " + std::to_string(n.id) + " references missing parent " +
                      std::to_string(n.parent));
    f.children_[n.parent].push_back(n.id);
  }

  // acyclicity: walk parent chains with a visit stamp
  std::unordered_map<std::int64_t, int> state;  // 0 unseen, 1 on path, 2 done
  for (const SwcNode& start : f.nodes_) {
    if (state[start.id] == 2) continue;
    std::vector<std::int64_t> path;
    std::int64_t cur = start.id;
    while (cur != -1 && state[cur] != 2) {
      if (state[cur] == 1)
        throw Error(ErrorCode::CycleDetected,
                    "swc: parent cycle through node id " + std::to_string(cur));
      state[cur] = 1;
      path.push_back(cur);
      cur = f.nodes_[f.index_of_.at(cur)].parent;
    }
    for (std::int64_t id : path) state[id] = 2;
  }
  return f;
}

const std::vector<std::int64_t>& SwcForest::children(std::int64_t id) const {
  auto it = children_.find(id);
  return it == children_.end() ? kNoChildren : it->second;
}

std::vector<std::int64_t> SwcForest::root_ids() const {
  std::vector<std::int64_t> roots;
  for (const SwcNode& n : nodes_)
    if (n.parent == -1) roots.push_back(n.id);
  return roots;
}

SwcForest parse_swc(std::istream& in) {
  std::vector<SwcNode> nodes;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  bool in_header = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (in_header) header.push_back(line.substr(first));
      continue;
    }
    in_header = false;

    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.size() != 7)
      throw Error(ErrorCode::MalformedLine,
                  "swc: line " + std::to_string(line_no) + ": expected 7 fields, got " +
                      std::to_string(tok.size()));

    SwcNode n;
    std::int64_t type_code = 0;
    if (!parse_int(tok[0], n.id) || !parse_int(tok[1], type_code) ||
        !parse_real(tok[2], n.x) || !parse_real(tok[3], n.y) ||
        !parse_real(tok[4], n.z) || !parse_real(tok[5], n.radius) ||
        !parse_int(tok[6], n.parent))
      throw Error(ErrorCode::MalformedLine,
                  "swc: line " + std::to_string(line_no) + ": unparsable field");
    if (n.radius < 0.0)
      throw Error(ErrorCode::MalformedLine,
                  "swc: line " + std::to_string(line_no) + ": negative radius");
    n.type_code = static_cast<int>(type_code);
    nodes.push_back(n);
  }
  return SwcForest::from_nodes(std::move(nodes), std::move(header));
}

SwcForest parse_swc_string(const std::string& text) {
  std::istringstream in(text);
  return parse_swc(in);
}

SwcForest read_swc_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "swc: cannot open " + path, ErrorKind::Runtime);
  return parse_swc(in);
}

std::string write_swc(const SwcForest& forest) {
  std::string out;
  for (const std::string& c : forest.header_comments()) {
    out += c;
    out += '\n';
  }
  if (forest.header_comments().empty()) out += "# SWC\n";

  // topological order: roots first, then children, keeping node order within
  // each frontier so the output is deterministic
  std::unordered_map<std::int64_t, bool> emitted;
  emitted.reserve(forest.size());
  std::vector<const SwcNode*> pending;
  pending.reserve(forest.size());
  for (const SwcNode& n : forest.nodes()) pending.push_back(&n);

  while (!pending.empty()) {
    std::vector<const SwcNode*> next;
    bool progressed = false;
    for (const SwcNode* n : pending) {
      if (n->parent != -1 && !emitted[n->parent]) {
        next.push_back(n);
        continue;
      }
      progressed = true;
      emitted[n->id] = true;
      out += std::to_string(n->id);
      out += ' ';
      out += std::to_string(n->type_code);
      out += ' ';
      append_real(out, n->x);
      out += ' ';
      append_real(out, n->y);
      out += ' ';
      append_real(out, n->z);
      out += ' ';
      append_real(out, n->radius);
      out += ' ';
      out += std::to_string(n->parent);
      out += '\n';
    }
    if (!progressed) break;  // unreachable for a valid forest
    pending = std::move(next);
  }
  return out;
}

void write_swc_file(const SwcForest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::IoError, "swc: cannot write " + path, ErrorKind::Runtime);
  out << write_swc(forest);
}

std::vector<std::int64_t> terminals(const SwcForest& forest, const Box3& bbox,
                                    double margin) {
  if (bbox.degenerate())
    throw Error(ErrorCode::DegenerateBox, "terminals: zero-extent bounding box");
  if (margin < 0.0)
    throw Error(ErrorCode::InvalidConfig, "terminals: margin must be >= 0");

  std::vector<std::int64_t> out;
  for (const SwcNode& n : forest.nodes()) {
    const std::size_t nchild = forest.children(n.id).size();
    bool term = nchild == 0 || (n.parent == -1 && nchild <= 1);
    if (!term) {
      const Vec3d p = n.pos();
      for (int a = 0; a < 3 && !term; ++a)
        term = std::abs(p[a] - bbox.lo[a]) <= margin || std::abs(bbox.hi[a] - p[a]) <= margin;
    }
    if (term) out.push_back(n.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::int64_t>> forest_components(const SwcForest& forest) {
  std::unordered_map<std::int64_t, std::int64_t> root_of;  // id -> root of its tree
  root_of.reserve(forest.size());

  // parent chains terminate at roots; memoize along the way
  for (const SwcNode& n : forest.nodes()) {
    std::vector<std::int64_t> path;
    std::int64_t cur = n.id;
    while (true) {
      auto it = root_of.find(cur);
      if (it != root_of.end()) {
        cur = it->second;
        break;
      }
      path.push_back(cur);
      const std::int64_t p = forest.node(cur).parent;
      if (p == -1) break;
      cur = p;
    }
    for (std::int64_t id : path) root_of[id] = cur;
  }

  std::vector<std::vector<std::int64_t>> groups;
  std::unordered_map<std::int64_t, std::size_t> group_of_root;
  for (const SwcNode& n : forest.nodes()) {
    const std::int64_t root = root_of.at(n.id);
    auto it = group_of_root.find(root);
    if (it == group_of_root.end()) {
      it = group_of_root.emplace(root, groups.size()).first;
      groups.emplace_back();
    }
    groups[it->second].push_back(n.id);
  }
  return groups;
}

std::unordered_map<std::int64_t, std::size_t> component_of_node(const SwcForest& forest) {
  std::unordered_map<std::int64_t, std::size_t> out;
  const auto groups = forest_components(forest);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::int64_t id : groups[g]) out[id] = g;
  return out;
}

Box3 forest_bbox(const SwcForest& a, const SwcForest& b) {
  Box3 box;
  box.lo = Vec3d::Constant(std::numeric_limits<double>::infinity());
  box.hi = Vec3d::Constant(-std::numeric_limits<double>::infinity());
  auto take = [&](const SwcForest& f) {
    for (const SwcNode& n : f.nodes()) {
      box.lo = box.lo.cwiseMin(n.pos());
      box.hi = box.hi.cwiseMax(n.pos());
    }
  };
  take(a);
  take(b);
  return box;
}

}  // namespace neurite
