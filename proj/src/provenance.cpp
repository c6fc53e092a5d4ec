#include "neurite/provenance.hpp"

#include <fstream>
#include <vector>

#include "neurite/error.hpp"

namespace neurite {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "digest: cannot open " + path, ErrorKind::Runtime);
  std::vector<char> buf(1 << 16);
  std::uint64_t h = 0xcbf29ce484222325ull;
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return std::string("fnv1a64:") + buf;
}

nlohmann::json provenance_json(const std::string& subcommand,
                               const nlohmann::json& resolved_config,
                               const std::map<std::string, std::string>& input_digests) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["subcommand"] = subcommand;
  j["config"] = resolved_config;
  if (!input_digests.empty()) {
    nlohmann::json in;
    for (const auto& [path, digest] : input_digests) in[path] = digest;
    j["inputs"] = in;
  }
  return j;
}

}  // namespace neurite
