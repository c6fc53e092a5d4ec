#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

namespace neurite {

inline constexpr const char* kToolName = "neurite-recon";
inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);
std::string digest_hex(std::uint64_t digest);

// Provenance block embedded in every output artifact: tool identity, the
// fully resolved configuration, and input file digests. Deliberately free of
// timestamps and thread counts so identical runs stay byte-identical.
nlohmann::json provenance_json(const std::string& subcommand,
                               const nlohmann::json& resolved_config,
                               const std::map<std::string, std::string>& input_digests);

}  // namespace neurite
