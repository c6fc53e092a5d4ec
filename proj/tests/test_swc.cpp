#include <set>
#include <sstream>

#include "doctest.h"
#include "neurite/rng.hpp"
#include "neurite/swc.hpp"
#include "support/oracles.hpp"

using namespace neurite;

namespace {

bool structurally_equal(const SwcForest& a, const SwcForest& b) {
  if (a.size() != b.size()) return false;
  for (const SwcNode& n : a.nodes()) {
    if (!b.has_id(n.id)) return false;
    const SwcNode& m = b.node(n.id);
    if (n.type_code != m.type_code || n.parent != m.parent) return false;
    if (n.x != m.x || n.y != m.y || n.z != m.z || n.radius != m.radius) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parse: minimal root record") {
  const SwcForest f = parse_swc_string("1 0 0.0 0.0 0.0 1.0 -1\n");
  REQUIRE(f.size() == 1);
  const SwcNode& n = f.nodes()[0];
  CHECK(n.id == 1);
  CHECK(n.x == 0.0);
  CHECK(n.radius == 1.0);
  CHECK(n.parent == -1);
}

TEST_CASE("parse: comments, blanks and forward parent references") {
  const SwcForest f = parse_swc_string(
      "# a header\n"
      "\n"
      "2 0 1 0 0 1 5\n"
      "5 0 0 0 0 1 -1\n");
  REQUIRE(f.size() == 2);
  CHECK(f.nodes()[0].id == 2);  // file order preserved
  CHECK(f.node(2).parent == 5);
  CHECK(f.header_comments().size() == 1);
}

TEST_CASE("parse: two-node cycle is rejected") {
  try {
    parse_swc_string("1 0 0 0 0 1 2\n2 0 1 0 0 1 1\n");
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
  }
}

TEST_CASE("parse: error cases name the offender") {
  try {
    parse_swc_string("1 0 0 0 0 1 -1\n1 0 1 1 1 1 -1\n");
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateId);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
  try {
    parse_swc_string("1 0 0 0 0 1 7\n");
    FAIL("expected DanglingParent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DanglingParent);
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
  try {
    parse_swc_string("1 0 0 0 0 1\n");
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedLine);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  try {
    parse_swc_string("1 0 zero 0 0 1 -1\n");
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedLine);
  }
}

TEST_CASE("write: empty forest emits header only") {
  const std::string text = write_swc(SwcForest{});
  CHECK(text.find('#') == 0);
  const SwcForest f = parse_swc_string(text);
  CHECK(f.empty());
}

TEST_CASE("write: one node, parents before children") {
  const SwcForest one = parse_swc_string("1 0 1 2 3 0.5 -1\n");
  const std::string text = write_swc(one);
  int data_lines = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++data_lines;
  CHECK(data_lines == 1);

  // parents always appear before children, even for out-of-order input
  const SwcForest f = parse_swc_string("2 0 1 0 0 1 5\n5 0 0 0 0 1 -1\n");
  const std::string out = write_swc(f);
  CHECK(out.find("\n5 ") < out.find("\n2 "));
}

TEST_CASE("round trip: parse(write(f)) preserves structure and values") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const SwcForest f = oracle::random_forest(rng, 50);
    const SwcForest g = parse_swc_string(write_swc(f));
    CHECK(structurally_equal(f, g));
  }
}

TEST_CASE("terminals: single node and straight path") {
  const SwcForest one = parse_swc_string("1 0 5 5 5 1 -1\n");
  Box3 box;
  box.lo = Vec3d(0, 0, 0);
  box.hi = Vec3d(10, 10, 10);
  CHECK(terminals(one, box, 0.0) == std::vector<std::int64_t>{1});

  std::string path;
  for (int i = 1; i <= 10; ++i)
    path += std::to_string(i) + " 0 " + std::to_string(i) + " 5 5 1 " +
            std::to_string(i == 1 ? -1 : i - 1) + "\n";
  const SwcForest p = parse_swc_string(path);
  Box3 big;
  big.lo = Vec3d(-100, -100, -100);
  big.hi = Vec3d(100, 100, 100);
  CHECK(terminals(p, big, 0.0) == std::vector<std::int64_t>{1, 10});
}

TEST_CASE("terminals: Y tree with one tip on the boundary") {
  // derived by enumerating nodes against the definition: three tips, no
  // interior nodes; the branch node (2 children) stays interior
  const SwcForest y = parse_swc_string(
      "1 0 5 5 0 1 -1\n"   // tip (root with one child)
      "2 0 5 5 5 1 1\n"    // branch node
      "3 0 2 5 9 1 2\n"    // tip
      "4 0 9.5 5 5 1 2\n"  // tip within margin 1 of the x=10 face
  );
  Box3 box;
  box.lo = Vec3d(0, 0, 0);
  box.hi = Vec3d(10, 10, 10);
  CHECK(terminals(y, box, 1.0) == std::vector<std::int64_t>{1, 3, 4});
}

TEST_CASE("terminals: monotone in margin") {
  Rng rng(3);
  const SwcForest f = oracle::random_forest(rng, 40);
  Box3 box;
  box.lo = Vec3d(-100, -100, -100);
  box.hi = Vec3d(100, 100, 100);
  const auto t1 = terminals(f, box, 5.0);
  const auto t2 = terminals(f, box, 30.0);
  std::set<std::int64_t> s2(t2.begin(), t2.end());
  for (std::int64_t id : t1) CHECK(s2.count(id) == 1);
}

TEST_CASE("terminals: degenerate box is rejected") {
  const SwcForest one = parse_swc_string("1 0 0 0 0 1 -1\n");
  Box3 box;  // zero extent
  CHECK_THROWS_AS(terminals(one, box, 1.0), Error);
}

TEST_CASE("forest_components: hand cases") {
  const SwcForest tree = parse_swc_string("1 0 0 0 0 1 -1\n2 0 1 0 0 1 1\n");
  CHECK(forest_components(tree).size() == 1);

  const SwcForest two = parse_swc_string(
      "1 0 0 0 0 1 -1\n2 0 1 0 0 1 1\n3 0 9 9 9 1 -1\n4 0 8 9 9 1 3\n");
  const auto groups = forest_components(two);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].size() == 2);
  CHECK(groups[1].size() == 2);
}

TEST_CASE("forest_components: random forests match the union-find oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const SwcForest f = oracle::random_forest(rng, 60);
    const auto groups = forest_components(f);
    CHECK(groups.size() == oracle::union_find_components(f));

    std::set<std::int64_t> seen;
    std::size_t total = 0;
    for (const auto& g : groups) {
      total += g.size();
      for (std::int64_t id : g) CHECK(seen.insert(id).second);
    }
    CHECK(total == f.size());
  }
}
