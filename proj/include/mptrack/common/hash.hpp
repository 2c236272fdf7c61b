// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <torch/torch.h>

namespace mptrack {

/// Git blob hash (SHA-1 over "blob <size>\0" + content), lowercase hex.
std::string content_hash(std::span<const std::byte> bytes);
std::string content_hash(std::string_view text);
std::string file_hash(const std::filesystem::path& path);

/// Content hash over every named parameter and buffer of a module, in
/// registration order. Used to prove frozen parts stay frozen.
std::string parameter_hash(const torch::nn::Module& module);

}  // namespace mptrack
