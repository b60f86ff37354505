#include "dsekit/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsekit {

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  // Shortest representation that parses back to the same bits.
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_join(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json run_manifest::to_json() const {
  nlohmann::json j;
  j["artifact_version"] = artifact_version;
  j["command"] = command;
  j["config"] = config;
  j["master_seed"] = master_seed;
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& [path, hash] : input_hashes)
    inputs.push_back({{"path", path}, {"fnv1a64", hash}});
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  return j;
}

run_manifest run_manifest::from_json(const nlohmann::json& j) {
  run_manifest m;
  m.artifact_version = j.at("artifact_version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const auto& e : j.at("inputs"))
    m.input_hashes.emplace_back(e.at("path").get<std::string>(),
                                e.at("fnv1a64").get<std::string>());
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

void run_manifest::save(const std::string& path) const {
  write_text_file(path, to_json().dump(2) + "\n");
}

run_manifest run_manifest::load(const std::string& path) {
  return from_json(nlohmann::json::parse(read_text_file(path)));
}

}  // namespace dsekit
