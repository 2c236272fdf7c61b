// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/app/manifest.hpp"

#include <algorithm>
#include <fstream>

#include "mptrack/common/error.hpp"
#include "mptrack/common/hash.hpp"

namespace mptrack::app {

namespace fs = std::filesystem;
using nlohmann::json;

Manifest make_manifest(const std::string& command, const RunConfig& config) {
  Manifest m;
  m.command = command;
  m.config = config_to_json(config);
  m.config_hash = config_hash(config);
  m.seed = config.seed;
  return m;
}

std::string path_hash(const fs::path& path) {
  require(fs::exists(path), ErrorCategory::kIo, "manifest: missing path " + path.string());
  if (!fs::is_directory(path)) return file_hash(path);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) {
    listing += fs::relative(f, path).generic_string() + " " + file_hash(f) + "\n";
  }
  return content_hash(listing);
}

void add_input(Manifest& m, const fs::path& path) {
  m.inputs.emplace_back(path.generic_string(), path_hash(path));
}

void add_output(Manifest& m, const fs::path& path) {
  m.outputs.emplace_back(path.generic_string(), path_hash(path));
}

json manifest_to_json(const Manifest& m) {
  auto list = [](const auto& v) {
    json a = json::array();
    for (const auto& [p, h] : v) a.push_back({{"path", p}, {"hash", h}});
    return a;
  };
  return {{"version", kManifestVersion}, {"command", m.command},   {"seed", m.seed},
          {"config_hash", m.config_hash}, {"config", m.config},     {"inputs", list(m.inputs)},
          {"outputs", list(m.outputs)},   {"extra", m.extra}};
}

void write_manifest(const Manifest& m, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "manifest.json");
  require(static_cast<bool>(out), ErrorCategory::kIo,
          "manifest: cannot write " + (dir / "manifest.json").string());
  out << manifest_to_json(m).dump(2) << "\n";
}

}  // namespace mptrack::app
