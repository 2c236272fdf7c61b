// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "json.hpp"
#include "mptrack/synthdata/sequence.hpp"

namespace mptrack::synth {

inline constexpr int kSequenceFormatVersion = 1;

/// Writes `dir/frames/NNNNNN.pgm` (binary 8-bit PGM) and `dir/annotations.json`.
void save_sequence(const SyntheticSequence& seq, const std::filesystem::path& dir);

/// Inverse of save_sequence. Malformed input raises kParse naming the file and
/// field; a foreign format version raises kUnsupportedVersion.
SyntheticSequence load_sequence(const std::filesystem::path& dir);

void write_pgm(const Image& image, const std::filesystem::path& path);
Image read_pgm(const std::filesystem::path& path);

nlohmann::json config_to_json(const SynthConfig& cfg);
SynthConfig config_from_json(const nlohmann::json& j);

nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& j);

}  // namespace mptrack::synth
