#ifndef LATTICEME_MANIFEST_HPP
#define LATTICEME_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

// Every CLI run writes one manifest.json recording what produced the output
// directory; a run is reproducible bit for bit from (config, seed).

namespace latticeme {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::string subcommand;
  std::string config_hash;  // fnv1a-64 over the config file bytes, "-" if none
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;
};

std::string hash_file_hex(const std::string& path);
void write_manifest(const RunManifest& m, const std::string& dir);

}  // namespace latticeme

#endif
