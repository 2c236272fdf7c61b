// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "mptrack/common/error.hpp"
#include "mptrack/common/rng.hpp"
#include "mptrack/synthdata/sequence.hpp"

namespace mptrack::synth {
namespace {

constexpr double kOccluderMargin = 4.0;

void config_error(const std::string& field, const std::string& why) {
  fail(ErrorCategory::kConfig, "invalid SynthConfig." + field + ": " + why);
}

void validate_object(const ObjectSpec& o, const std::string& name, int size) {
  if (!(o.width >= 1.0) || o.width > size) config_error(name + ".width", "must be in [1, image_size]");
  if (!(o.height >= 1.0) || o.height > size) config_error(name + ".height", "must be in [1, image_size]");
  if (!std::isfinite(o.vx)) config_error(name + ".vx", "must be finite");
  if (!std::isfinite(o.vy)) config_error(name + ".vy", "must be finite");
}

/// Per-object appearance drawn once from its texture seed.
struct Texture {
  TextureKind kind;
  double lo;
  double hi;
  double period;
  double angle;
  double phase;

  static Texture from(const ObjectSpec& spec) {
    Rng rng(derive_seed(spec.texture_seed, "texture"));
    Texture t{};
    t.kind = spec.texture;
    t.lo = uniform(rng, 0.0, 0.35);
    t.hi = uniform(rng, 0.65, 1.0);
    if (uniform(rng, 0.0, 1.0) < 0.5) std::swap(t.lo, t.hi);
    t.period = uniform(rng, 6.0, 14.0);
    t.angle = uniform(rng, 0.0, std::numbers::pi);
    t.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    return t;
  }

  /// (u, v) are pixel coordinates relative to the object's top-left corner.
  double value(double u, double v) const {
    double s = 0.0;
    switch (kind) {
      case TextureKind::kStripes: {
        const double proj = u * std::cos(angle) + v * std::sin(angle);
        s = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * proj / period + phase);
        break;
      }
      case TextureKind::kChecker: {
        const double cell = 0.5 * period;
        const auto a = static_cast<long>(std::floor(u / cell));
        const auto b = static_cast<long>(std::floor(v / cell));
        s = ((a + b) % 2 == 0) ? 1.0 : 0.0;
        break;
      }
      case TextureKind::kDots: {
        const double cell = period;
        const double du = std::fmod(u, cell) - 0.5 * cell;
        const double dv = std::fmod(v, cell) - 0.5 * cell;
        s = (du * du + dv * dv <= 0.1 * cell * cell) ? 1.0 : 0.0;
        break;
      }
    }
    return lo + (hi - lo) * s;
  }
};

/// Integer-aligned trajectory with reflection at the borders.
std::vector<Box> trajectory(const ObjectSpec& spec, int num_frames, int size,
                            Rng& rng) {
  const double w = std::round(spec.width);
  const double h = std::round(spec.height);
  double x = uniform(rng, 0.0, size - w);
  double y = uniform(rng, 0.0, size - h);
  double vx = spec.vx;
  double vy = spec.vy;
  auto bounce = [](double& pos, double& vel, double lim) {
    for (int guard = 0; guard < 8 && (pos < 0.0 || pos > lim); ++guard) {
      if (pos < 0.0) {
        pos = -pos;
        vel = -vel;
      }
      if (pos > lim) {
        pos = 2.0 * lim - pos;
        vel = -vel;
      }
    }
    pos = std::clamp(pos, 0.0, lim);
  };
  std::vector<Box> boxes;
  boxes.reserve(num_frames);
  for (int t = 0; t < num_frames; ++t) {
    if (t > 0) {
      x += vx;
      y += vy;
      bounce(x, vx, size - w);
      bounce(y, vy, size - h);
    }
    const double x0 = std::round(x);
    const double y0 = std::round(y);
    boxes.push_back({x0, y0, x0 + w, y0 + h});
  }
  return boxes;
}

enum class Side { kLeft, kRight, kTop, kBottom };

Box occluder_box(const Box& target, double coverage, Side side, int size) {
  const double margin = kOccluderMargin;
  Box b{};
  switch (side) {
    case Side::kLeft: {
      const double cw = std::round(coverage * target.width());
      b = {target.x0 - margin, target.y0 - margin, target.x0 + cw, target.y1 + margin};
      break;
    }
    case Side::kRight: {
      const double cw = std::round(coverage * target.width());
      b = {target.x1 - cw, target.y0 - margin, target.x1 + margin, target.y1 + margin};
      break;
    }
    case Side::kTop: {
      const double ch = std::round(coverage * target.height());
      b = {target.x0 - margin, target.y0 - margin, target.x1 + margin, target.y0 + ch};
      break;
    }
    case Side::kBottom: {
      const double ch = std::round(coverage * target.height());
      b = {target.x0 - margin, target.y1 - ch, target.x1 + margin, target.y1 + margin};
      break;
    }
  }
  return clipped(b, size, size);
}

}  // namespace

void SynthConfig::validate() const {
  if (image_size <= 0) config_error("image_size", "must be positive");
  if (grid_size <= 0) config_error("grid_size", "must be positive");
  if (image_size % grid_size != 0) {
    config_error("image_size", "must be divisible by grid_size");
  }
  if (num_frames < 8) config_error("num_frames", "must be at least 8");
  if (!(noise_std >= 0.0)) config_error("noise_std", "must be non-negative");
  validate_object(target, "target", image_size);
  for (std::size_t i = 0; i < distractors.size(); ++i) {
    validate_object(distractors[i], "distractors[" + std::to_string(i) + "]",
                    image_size);
  }
  for (std::size_t i = 0; i < occluders.size(); ++i) {
    const auto& o = occluders[i];
    const std::string name = "occluders[" + std::to_string(i) + "]";
    if (!(o.coverage >= 0.0 && o.coverage <= 1.0)) {
      config_error(name + ".coverage", "must be in [0, 1]");
    }
    if (o.enter_frame < 0 || o.exit_frame < o.enter_frame) {
      config_error(name + ".exit_frame", "must satisfy 0 <= enter_frame <= exit_frame");
    }
  }
}

double covered_fraction(const Box& target, const std::vector<Box>& occluders) {
  // Exact union area by coordinate compression over the clipped rectangles.
  std::vector<Box> parts;
  for (const auto& o : occluders) {
    const Box c{std::max(o.x0, target.x0), std::max(o.y0, target.y0),
                std::min(o.x1, target.x1), std::min(o.y1, target.y1)};
    if (c.x1 > c.x0 && c.y1 > c.y0) parts.push_back(c);
  }
  if (parts.empty()) return 0.0;
  std::set<double> xs_set;
  std::set<double> ys_set;
  for (const auto& p : parts) {
    xs_set.insert(p.x0);
    xs_set.insert(p.x1);
    ys_set.insert(p.y0);
    ys_set.insert(p.y1);
  }
  const std::vector<double> xs(xs_set.begin(), xs_set.end());
  const std::vector<double> ys(ys_set.begin(), ys_set.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double mx = 0.5 * (xs[i] + xs[i + 1]);
      const double my = 0.5 * (ys[j] + ys[j + 1]);
      const bool hit = std::any_of(parts.begin(), parts.end(), [&](const Box& p) {
        return mx > p.x0 && mx < p.x1 && my > p.y0 && my < p.y1;
      });
      if (hit) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  }
  return area / target.area();
}

std::vector<std::uint8_t> target_mask(const Box& box, int grid_size, int stride) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid_size) * grid_size, 0);
  for (int i = 0; i < grid_size; ++i) {
    for (int j = 0; j < grid_size; ++j) {
      const double cx = (j + 0.5) * stride;
      const double cy = (i + 0.5) * stride;
      mask[static_cast<std::size_t>(i) * grid_size + j] = box.contains(cx, cy) ? 1 : 0;
    }
  }
  return mask;
}

bool SyntheticSequence::point_visible(int frame, double x, double y) const {
  const double size = config.image_size;
  if (x < 0.0 || y < 0.0 || x >= size || y >= size) return false;
  for (const auto& o : occluder_boxes.at(frame)) {
    if (x >= o.x0 && x < o.x1 && y >= o.y0 && y < o.y1) return false;
  }
  return true;
}

void SyntheticSequence::track_point(int reference_frame, double x, double y,
                                    int frame, double& out_x,
                                    double& out_y) const {
  const Box& a = gt_boxes.at(reference_frame);
  const Box& b = gt_boxes.at(frame);
  out_x = x + (b.x0 - a.x0);
  out_y = y + (b.y0 - a.y0);
}

SyntheticSequence generate_sequence(const SynthConfig& cfg) {
  cfg.validate();
  const int size = cfg.image_size;
  const int n = cfg.num_frames;
  Rng rng(derive_seed(cfg.seed, "sequence"));

  SyntheticSequence seq;
  seq.config = cfg;

  // Background: a few low-frequency gratings over a base level.
  const double base = uniform(rng, 0.3, 0.6);
  struct Grating {
    double fx, fy, phase, amp;
  };
  std::array<Grating, 3> gratings{};
  for (auto& g : gratings) {
    g = {uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05),
         uniform(rng, 0.0, 2.0 * std::numbers::pi), uniform(rng, 0.03, 0.08)};
  }
  std::vector<double> background(static_cast<std::size_t>(size) * size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double v = base;
      for (const auto& g : gratings) {
        v += g.amp * std::sin(2.0 * std::numbers::pi * (g.fx * x + g.fy * y) + g.phase);
      }
      background[static_cast<std::size_t>(y) * size + x] = v;
    }
  }

  const std::vector<Box> target_track = trajectory(cfg.target, n, size, rng);
  const Texture target_texture = Texture::from(cfg.target);
  std::vector<std::vector<Box>> distractor_tracks;
  std::vector<Texture> distractor_textures;
  for (const auto& d : cfg.distractors) {
    distractor_tracks.push_back(trajectory(d, n, size, rng));
    distractor_textures.push_back(Texture::from(d));
  }
  std::vector<Side> sides;
  std::vector<double> shades;
  for (std::size_t i = 0; i < cfg.occluders.size(); ++i) {
    sides.push_back(static_cast<Side>(uniform_int(rng, 0, 3)));
    shades.push_back(uniform(rng, 0.15, 0.85));
  }

  Rng noise_rng(derive_seed(cfg.seed, "noise"));
  std::normal_distribution<double> noise(0.0, cfg.noise_std > 0.0 ? cfg.noise_std : 1.0);

  std::vector<double> canvas(background.size());
  auto paint = [&](const Box& box, auto&& shade) {
    const int x0 = std::max(0, static_cast<int>(std::floor(box.x0)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.y0)));
    const int x1 = std::min(size, static_cast<int>(std::ceil(box.x1)));
    const int y1 = std::min(size, static_cast<int>(std::ceil(box.y1)));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        canvas[static_cast<std::size_t>(y) * size + x] = shade(x, y);
      }
    }
  };

  for (int t = 0; t < n; ++t) {
    canvas = background;
    std::vector<Box> distractors_now;
    for (std::size_t d = 0; d < distractor_tracks.size(); ++d) {
      const Box& b = distractor_tracks[d][t];
      distractors_now.push_back(b);
      const Texture& tex = distractor_textures[d];
      paint(b, [&](int x, int y) { return tex.value(x - b.x0, y - b.y0); });
    }
    const Box& tb = target_track[t];
    paint(tb, [&](int x, int y) { return target_texture.value(x - tb.x0, y - tb.y0); });

    std::vector<Box> occluders_now;
    for (std::size_t k = 0; k < cfg.occluders.size(); ++k) {
      const auto& spec = cfg.occluders[k];
      if (t < spec.enter_frame || t >= spec.exit_frame || spec.coverage <= 0.0) continue;
      const Box ob = occluder_box(tb, spec.coverage, sides[k], size);
      if (!ob.valid()) continue;
      occluders_now.push_back(ob);
      const double shade = shades[k];
      paint(ob, [&](int x, int y) {
        // Faint fixed pattern so occluders are not perfectly flat.
        return shade + 0.04 * (((x / 3) + (y / 3)) % 2 == 0 ? 1.0 : -1.0);
      });
    }

    Image img;
    img.width = size;
    img.height = size;
    img.pixels.resize(canvas.size());
    for (std::size_t i = 0; i < canvas.size(); ++i) {
      double v = canvas[i];
      if (cfg.noise_std > 0.0) v += noise(noise_rng);
      v = std::clamp(v, 0.0, 1.0);
      img.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }

    const double visibility = 1.0 - covered_fraction(tb, occluders_now);
    bool near = false;
    for (const auto& d : distractors_now) {
      const double dist = std::hypot(d.center_x() - tb.center_x(), d.center_y() - tb.center_y());
      if (dist < tb.diagonal()) near = true;
    }

    seq.frames.push_back(std::move(img));
    seq.gt_boxes.push_back(tb);
    seq.gt_target_mask.push_back(target_mask(tb, cfg.grid_size, cfg.stride()));
    seq.gt_point_visibility.push_back(visibility);
    seq.attributes.push_back({visibility < 1.0, near});
    seq.occluder_boxes.push_back(std::move(occluders_now));
    seq.distractor_boxes.push_back(std::move(distractors_now));
  }
  return seq;
}

}  // namespace mptrack::synth
