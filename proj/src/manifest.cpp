#include "latticeme/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "latticeme/errors.hpp"
#include "latticeme/rng.hpp"

namespace latticeme {

std::string hash_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for hashing: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  char hex[19];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(hash_name(buf.str())));
  return hex;
}

void write_manifest(const RunManifest& m, const std::string& dir) {
  nlohmann::json j;
  j["subcommand"] = m.subcommand;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["wall_time_s"] = m.wall_time_s;
  j["outputs"] = m.outputs;
  const std::string path = dir + "/manifest.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace latticeme
