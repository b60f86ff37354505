#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace dsekit {

// FNV-1a over raw bytes; used for content hashes of generated trial data and
// of input files recorded in run manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_file(const std::string& path);  // throws if unreadable

std::string hex64(std::uint64_t v);

// Shortest round-trip decimal form of a double ("%.17g" with down-shortening)
// so report files are byte-stable across runs and worker counts.
std::string format_double(double v);

// CSV assembly: rows of preformatted cells, joined with commas and '\n'.
std::string csv_join(const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// A run manifest captures everything needed to replay a command: the
// subcommand, its fully resolved configuration, the master seed, hashes of
// the input files, and the artifact names it wrote. Replays must produce
// byte-identical artifacts regardless of worker count.
struct run_manifest {
  std::string artifact_version = "1";
  std::string command;
  nlohmann::json config;
  std::uint64_t master_seed = 0;
  std::vector<std::pair<std::string, std::string>> input_hashes;  // path, hex
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
  static run_manifest from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static run_manifest load(const std::string& path);
};

}  // namespace dsekit
