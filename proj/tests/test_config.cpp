#include <cmath>

#include "doctest.h"
#include "neurite/config.hpp"
#include "neurite/error.hpp"
#include "neurite/provenance.hpp"

using namespace neurite;

TEST_CASE("toml subset: sections, scalars, comments") {
  const TomlConfig cfg = TomlConfig::parse(
      "# experiment defaults\n"
      "[loss]\n"
      "delta_v = 0.5   # compactness margin\n"
      "delta_d = 1.5\n"
      "patch_size = 32\n"
      "[recon]\n"
      "epsilon = 1.0\n"
      "jump_radius = 2\n"
      "name = \"baseline\"\n"
      "verbose = true\n");
  CHECK(cfg.get_double("loss", "delta_v") == 0.5);
  CHECK(cfg.get_int("loss", "patch_size") == 32);
  CHECK(cfg.get_double("recon", "epsilon") == 1.0);
  CHECK(cfg.get_string("recon", "name") == "baseline");
  CHECK(cfg.get_bool("recon", "verbose") == true);
  CHECK(!cfg.get_double("loss", "missing").has_value());
  CHECK(!cfg.get_double("nope", "delta_v").has_value());
}

TEST_CASE("toml subset: inf is accepted for epsilon-style values") {
  const TomlConfig cfg = TomlConfig::parse("[recon]\nepsilon = inf\n");
  CHECK(std::isinf(*cfg.get_double("recon", "epsilon")));
}

TEST_CASE("toml subset: malformed input is rejected with a line number") {
  try {
    TomlConfig::parse("[recon\nepsilon = 1\n");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(TomlConfig::parse("key value\n"), Error);
  CHECK_THROWS_AS(TomlConfig::parse("[a]\nx = [1,2]\n"), Error);
  try {
    TomlConfig::parse("[a]\nx = oops\n").get_double("a", "x");
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
}

TEST_CASE("provenance: digests are stable and timestamp-free") {
  const std::uint64_t d1 = fnv1a64("abc", 3);
  const std::uint64_t d2 = fnv1a64("abc", 3);
  const std::uint64_t d3 = fnv1a64("abd", 3);
  CHECK(d1 == d2);
  CHECK(d1 != d3);

  const auto j = provenance_json("loss", nlohmann::json{{"epsilon", 1.0}},
                                 {{"field.json", digest_hex(d1)}});
  CHECK(j["tool"] == "neurite-recon");
  CHECK(j["config"]["epsilon"] == 1.0);
  CHECK(j.dump().find("time") == std::string::npos);
}
