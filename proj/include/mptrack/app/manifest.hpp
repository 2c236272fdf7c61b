// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mptrack/app/config.hpp"

namespace mptrack::app {

inline constexpr int kManifestVersion = 1;

struct Manifest {
  std::string command;
  nlohmann::json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, content hash
  std::vector<std::pair<std::string, std::string>> outputs;  // path, content hash
  nlohmann::json extra = nlohmann::json::object();
};

Manifest make_manifest(const std::string& command, const RunConfig& config);

/// Records `path` with its content hash; directories are hashed over their
/// sorted regular files.
void add_input(Manifest& m, const std::filesystem::path& path);
void add_output(Manifest& m, const std::filesystem::path& path);

std::string path_hash(const std::filesystem::path& path);

nlohmann::json manifest_to_json(const Manifest& m);

/// Writes `<dir>/manifest.json`.
void write_manifest(const Manifest& m, const std::filesystem::path& dir);

}  // namespace mptrack::app
