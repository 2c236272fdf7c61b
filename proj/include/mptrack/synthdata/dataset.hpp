// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mptrack/synthdata/sequence.hpp"

namespace mptrack::synth {

/// Knobs for drawing random scenarios. Sizes are fractions of image_size.
struct ScenarioOptions {
  int image_size = 252;
  int grid_size = 18;
  int num_frames = 64;
  double min_size = 0.18;
  double max_size = 0.32;
  double max_speed = 2.5;  // px/frame per axis
  int max_distractors = 2;
  double occlusion_probability = 0.5;
  double noise_std = 0.02;
  /// When > 0, forces one full occlusion of this many frames starting in the
  /// middle third of the sequence.
  int full_occlusion_frames = 0;
};

SynthConfig sample_config(const ScenarioOptions& options, std::uint64_t seed);

std::vector<SyntheticSequence> generate_dataset(const ScenarioOptions& options,
                                                int count, std::uint64_t seed);

inline constexpr int kWindowLength = 8;

/// Eight frames drawn from one sequence at a fixed step. Frames 1 and 5 are
/// the references and frame 8 is the current frame.
struct WindowSpec {
  int sequence = 0;
  int start = 0;
  int step = 1;

  int frame(int k) const { return start + k * step; }
  std::array<int, kWindowLength> frames() const;
  int reference_a() const { return frame(0); }
  int reference_b() const { return frame(4); }
  int current() const { return frame(7); }
};

/// Every window with step in [1, max_step] that fits in each sequence.
std::vector<WindowSpec> enumerate_windows(const std::vector<SyntheticSequence>& seqs,
                                          int max_step);

/// Sequences with at least one frame whose visibility drops below 0.5.
bool occlusion_heavy(const SyntheticSequence& seq);

}  // namespace mptrack::synth
