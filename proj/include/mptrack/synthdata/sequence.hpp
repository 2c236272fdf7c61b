// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "mptrack/synthdata/box.hpp"

namespace mptrack::synth {

enum class TextureKind { kStripes = 0, kChecker = 1, kDots = 2 };

/// A moving textured rectangle. Its start position is drawn from the
/// sequence seed; it bounces off the image border.
struct ObjectSpec {
  TextureKind texture = TextureKind::kStripes;
  std::uint64_t texture_seed = 0;
  double width = 32.0;   // px
  double height = 32.0;  // px
  double vx = 1.0;       // px/frame
  double vy = 0.0;       // px/frame

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

/// An occluder attached to the target during [enter_frame, exit_frame).
/// `coverage` is the covered fraction of the target box.
struct OccluderSpec {
  int enter_frame = 0;
  int exit_frame = 0;
  double coverage = 0.0;

  friend bool operator==(const OccluderSpec&, const OccluderSpec&) = default;
};

struct SynthConfig {
  int image_size = 252;
  int grid_size = 18;
  int num_frames = 64;
  ObjectSpec target;
  std::vector<ObjectSpec> distractors;
  std::vector<OccluderSpec> occluders;
  double noise_std = 0.02;
  std::uint64_t seed = 0;

  int stride() const { return image_size / grid_size; }

  /// Throws a kConfig error naming the first offending field.
  void validate() const;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// 8-bit grayscale frame. Pixel values map to [0, 1] as p / 255, which keeps
/// file storage lossless.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  float at(int x, int y) const {
    return static_cast<float>(pixels[static_cast<std::size_t>(y) * width + x]) /
           255.0f;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

struct FrameAttributes {
  bool occluded = false;
  bool distractor_near = false;

  friend bool operator==(const FrameAttributes&, const FrameAttributes&) = default;
};

struct SyntheticSequence {
  SynthConfig config;
  std::vector<Image> frames;
  std::vector<Box> gt_boxes;
  /// Per frame, grid_size x grid_size row-major; 1 where the cell center lies
  /// inside the target box.
  std::vector<std::vector<std::uint8_t>> gt_target_mask;
  /// Per frame, visible fraction of the target surface.
  std::vector<double> gt_point_visibility;
  std::vector<FrameAttributes> attributes;
  /// Per frame, the occluder rectangles drawn on that frame (clipped).
  std::vector<std::vector<Box>> occluder_boxes;
  std::vector<std::vector<Box>> distractor_boxes;

  int num_frames() const { return static_cast<int>(frames.size()); }

  /// Ground-truth visibility of an image point on a frame: inside the image
  /// and not covered by any occluder.
  bool point_visible(int frame, double x, double y) const;

  /// Position on `frame` of the target surface point that sits at (x, y) on
  /// `reference_frame`. Targets move by pure translation.
  void track_point(int reference_frame, double x, double y, int frame,
                   double& out_x, double& out_y) const;

  friend bool operator==(const SyntheticSequence&,
                         const SyntheticSequence&) = default;
};

SyntheticSequence generate_sequence(const SynthConfig& cfg);

/// Fraction of the target box covered by the union of `occluders`.
double covered_fraction(const Box& target, const std::vector<Box>& occluders);

std::vector<std::uint8_t> target_mask(const Box& box, int grid_size, int stride);

}  // namespace mptrack::synth
