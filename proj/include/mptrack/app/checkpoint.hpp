// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include <torch/torch.h>

#include "json.hpp"

namespace mptrack::app {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Named tensors plus JSON metadata. On disk: 8-byte magic, u32 version,
/// u64 metadata length, metadata text, then the raw little-endian tensor
/// payloads in the order listed by the metadata.
struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::map<std::string, torch::Tensor> tensors;

  bool has_prefix(const std::string& prefix) const;
};

using NameFilter = std::function<bool(const std::string&)>;

/// Stores parameters and buffers of `module` as `prefix/<name>`; names for
/// which `skip` returns true are left out.
void add_module(Checkpoint& ckpt, const std::string& prefix, const torch::nn::Module& module,
                const NameFilter& skip = {});

/// Copies `prefix/<name>` entries into `module`. Throws kInit naming the
/// first missing or mis-shaped entry.
void load_module(const Checkpoint& ckpt, const std::string& prefix, torch::nn::Module& module,
                 const NameFilter& skip = {});

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws kIo when missing, kParse on a damaged file and
/// kUnsupportedVersion on a version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mptrack::app
