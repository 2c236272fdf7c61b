// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/synthdata/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "mptrack/common/rng.hpp"

namespace mptrack::synth {
namespace {

ObjectSpec random_object(const ScenarioOptions& o, Rng& rng) {
  ObjectSpec spec;
  spec.texture = static_cast<TextureKind>(uniform_int(rng, 0, 2));
  spec.texture_seed = rng();
  spec.width = std::round(uniform(rng, o.min_size, o.max_size) * o.image_size);
  spec.height = std::round(uniform(rng, o.min_size, o.max_size) * o.image_size);
  spec.vx = uniform(rng, -o.max_speed, o.max_speed);
  spec.vy = uniform(rng, -o.max_speed, o.max_speed);
  return spec;
}

}  // namespace

std::array<int, kWindowLength> WindowSpec::frames() const {
  std::array<int, kWindowLength> out{};
  for (int k = 0; k < kWindowLength; ++k) out[k] = frame(k);
  return out;
}

SynthConfig sample_config(const ScenarioOptions& o, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "scenario"));
  SynthConfig cfg;
  cfg.image_size = o.image_size;
  cfg.grid_size = o.grid_size;
  cfg.num_frames = o.num_frames;
  cfg.noise_std = o.noise_std;
  cfg.seed = derive_seed(seed, "render");
  cfg.target = random_object(o, rng);
  const int distractors = o.max_distractors > 0 ? uniform_int(rng, 0, o.max_distractors) : 0;
  for (int i = 0; i < distractors; ++i) cfg.distractors.push_back(random_object(o, rng));

  const int n = o.num_frames;
  if (o.full_occlusion_frames > 0) {
    const int len = std::min(o.full_occlusion_frames, n - 2);
    const int lo = std::max(1, n / 3);
    const int hi = std::max(lo, std::min(2 * n / 3, n - len - 1));
    const int enter = uniform_int(rng, lo, hi);
    cfg.occluders.push_back({enter, enter + len, 1.0});
  } else if (uniform(rng, 0.0, 1.0) < o.occlusion_probability) {
    const int count = uniform_int(rng, 1, 2);
    for (int k = 0; k < count; ++k) {
      const int len = uniform_int(rng, 4, std::max(4, n / 4));
      const int enter = uniform_int(rng, 1, std::max(1, n - len - 1));
      const double coverage = uniform(rng, 0.0, 1.0) < 0.3 ? 1.0 : uniform(rng, 0.2, 0.9);
      cfg.occluders.push_back({enter, enter + len, coverage});
    }
  }
  return cfg;
}

std::vector<SyntheticSequence> generate_dataset(const ScenarioOptions& options,
                                                int count, std::uint64_t seed) {
  std::vector<SyntheticSequence> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(generate_sequence(sample_config(options, derive_seed(seed, i))));
  }
  return out;
}

std::vector<WindowSpec> enumerate_windows(const std::vector<SyntheticSequence>& seqs,
                                          int max_step) {
  std::vector<WindowSpec> out;
  for (int s = 0; s < static_cast<int>(seqs.size()); ++s) {
    const int n = seqs[s].num_frames();
    for (int step = 1; step <= max_step; ++step) {
      for (int start = 0; start + (kWindowLength - 1) * step < n; ++start) {
        out.push_back({s, start, step});
      }
    }
  }
  return out;
}

bool occlusion_heavy(const SyntheticSequence& seq) {
  return std::any_of(seq.gt_point_visibility.begin(), seq.gt_point_visibility.end(),
                     [](double v) { return v < 0.5; });
}

}  // namespace mptrack::synth
