// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/app/config.hpp"

#include <fstream>
#include <set>

#include "mptrack/common/error.hpp"
#include "mptrack/common/hash.hpp"

namespace mptrack::app {

using nlohmann::json;

namespace {

// Calls f(name, member) for every key, in the canonical order.
template <typename Config, typename F>
void visit_fields(Config& c, F&& f) {
  f("image_size", c.image_size);
  f("grid", c.grid);
  f("channels", c.channels);
  f("seed", c.seed);
  f("data_seed", c.data_seed);
  f("train_sequences", c.train_sequences);
  f("heldout_sequences", c.heldout_sequences);
  f("eval_sequences", c.eval_sequences);
  f("occlusion_sequences", c.occlusion_sequences);
  f("num_frames", c.num_frames);
  f("max_window_step", c.max_window_step);
  f("full_occlusion_frames", c.full_occlusion_frames);
  f("occlusion_probability", c.occlusion_probability);
  f("max_distractors", c.max_distractors);
  f("noise_std", c.noise_std);
  f("teacher_epochs", c.teacher_epochs);
  f("teacher_windows", c.teacher_windows);
  f("teacher_lr", c.teacher_lr);
  f("teacher_batch", c.teacher_batch);
  f("head_cls_weight", c.head_cls_weight);
  f("head_reg_weight", c.head_reg_weight);
  f("tracker_steps", c.tracker_steps);
  f("tracker_lr", c.tracker_lr);
  f("tracker_batch", c.tracker_batch);
  f("tracker_init_noise", c.tracker_init_noise);
  f("alpha", c.alpha);
  f("beta", c.beta);
  f("rho_max", c.rho_max);
  f("corruption", c.corruption);
  f("jepa_lr", c.jepa_lr);
  f("projnet_lr", c.projnet_lr);
  f("jepa_epochs", c.jepa_epochs);
  f("jepa_batch", c.jepa_batch);
  f("jepa_windows", c.jepa_windows);
  f("jepa_warmup", c.jepa_warmup);
  f("head_epochs", c.head_epochs);
  f("head_lr", c.head_lr);
  f("head_batch", c.head_batch);
  f("head_windows", c.head_windows);
  f("lambda_cgot", c.lambda_cgot);
  f("lambda_cpt", c.lambda_cpt);
  f("lambda_rgot", c.lambda_rgot);
  f("lambda_rpt", c.lambda_rpt);
  f("vis_weight", c.vis_weight);
  f("occu_steps", c.occu_steps);
  f("occu_lr", c.occu_lr);
  f("occu_batch", c.occu_batch);
  f("num_points", c.num_points);
  f("tracker_iterations", c.tracker_iterations);
  f("pr_threshold", c.pr_threshold);
  f("npr_threshold", c.npr_threshold);
  f("frame_step", c.frame_step);
  f("visibility_init", c.visibility_init);
  f("confidence_threshold", c.confidence_threshold);
  f("data_dir", c.data_dir);
  f("checkpoint_dir", c.checkpoint_dir);
  f("report_dir", c.report_dir);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else {
      std::size_t used = 0;
      T value{};
      if constexpr (std::is_same_v<T, int>) value = std::stoi(text, &used);
      else if constexpr (std::is_same_v<T, double>) value = std::stod(text, &used);
      else value = static_cast<T>(std::stoull(text, &used));
      if (used != text.size()) throw std::invalid_argument(text);
      return value;
    }
  } catch (const std::exception&) {
    fail(ErrorCategory::kConfig, "config: cannot parse value '" + text + "' for key " + key);
  }
}

}  // namespace

synth::ScenarioOptions RunConfig::scenario() const {
  synth::ScenarioOptions o;
  o.image_size = image_size;
  o.grid_size = grid;
  o.num_frames = num_frames;
  o.max_distractors = max_distractors;
  o.occlusion_probability = occlusion_probability;
  o.noise_std = noise_std;
  return o;
}

jepa::PretrainConfig RunConfig::pretrain_config() const {
  jepa::PretrainConfig p;
  p.alpha = alpha;
  p.beta = beta;
  p.rho_max = rho_max;
  p.corruption = corruption == "masking" ? jepa::CorruptionKind::kMasking
                                         : jepa::CorruptionKind::kCopyPaste;
  p.lr_base = jepa_lr;
  p.lr_projection = projnet_lr;
  p.epochs = jepa_epochs;
  p.warmup_fraction = jepa_warmup;
  p.batch_size = jepa_batch;
  p.seed = derive_seed(seed, "pretrain");
  return p;
}

occu::OccuSolverConfig RunConfig::occu_config() const {
  occu::OccuSolverConfig c;
  c.num_points = num_points;
  c.tracker.iterations = tracker_iterations;
  return c;
}

occu::OccuLambdas RunConfig::lambdas() const {
  return {lambda_cgot, lambda_cpt, lambda_rgot, lambda_rpt};
}

runtime::TrackerOptions RunConfig::tracker_options() const {
  runtime::TrackerOptions o;
  o.frame_step = frame_step;
  o.visibility_init_threshold = visibility_init;
  o.confidence_threshold = confidence_threshold;
  o.num_points = num_points;
  o.seed = derive_seed(seed, "track");
  return o;
}

metrics::EvalOptions RunConfig::eval_options() const { return {pr_threshold, npr_threshold}; }

void RunConfig::validate() const {
  profile().validate();
  auto positive = [](const char* key, double v) {
    require(v > 0.0, ErrorCategory::kConfig, std::string("config: ") + key + " must be > 0");
  };
  auto non_negative = [](const char* key, double v) {
    require(v >= 0.0, ErrorCategory::kConfig, std::string("config: ") + key + " must be >= 0");
  };
  positive("train_sequences", train_sequences);
  positive("heldout_sequences", heldout_sequences);
  positive("eval_sequences", eval_sequences);
  non_negative("occlusion_sequences", occlusion_sequences);
  require(num_frames >= 8, ErrorCategory::kConfig, "config: num_frames must be >= 8");
  require(max_window_step >= 1 && 7 * max_window_step < num_frames, ErrorCategory::kConfig,
          "config: max_window_step must be >= 1 and fit a window in num_frames");
  non_negative("alpha", alpha);
  non_negative("beta", beta);
  require(rho_max >= 0.0 && rho_max <= 1.0, ErrorCategory::kConfig,
          "config: rho_max must be in [0, 1]");
  require(corruption == "copy-paste" || corruption == "masking", ErrorCategory::kConfig,
          "config: corruption must be copy-paste or masking");
  for (auto [k, v] : {std::pair{"teacher_lr", teacher_lr}, {"tracker_lr", tracker_lr},
                      {"jepa_lr", jepa_lr}, {"projnet_lr", projnet_lr}, {"head_lr", head_lr},
                      {"occu_lr", occu_lr}, {"pr_threshold", pr_threshold},
                      {"npr_threshold", npr_threshold}}) {
    positive(k, v);
  }
  for (auto [k, v] : {std::pair{"lambda_cgot", lambda_cgot}, {"lambda_cpt", lambda_cpt},
                      {"lambda_rgot", lambda_rgot}, {"lambda_rpt", lambda_rpt},
                      {"vis_weight", vis_weight}, {"teacher_epochs", double(teacher_epochs)},
                      {"jepa_epochs", double(jepa_epochs)}, {"head_epochs", double(head_epochs)},
                      {"tracker_steps", double(tracker_steps)},
                      {"occu_steps", double(occu_steps)}}) {
    non_negative(k, v);
  }
  require(jepa_warmup >= 0.0 && jepa_warmup <= 1.0, ErrorCategory::kConfig,
          "config: jepa_warmup must be in [0, 1]");
  require(teacher_batch >= 1 && tracker_batch >= 1 && head_batch >= 1 && occu_batch >= 1,
          ErrorCategory::kConfig, "config: batch sizes must be >= 1");
  require(jepa_batch >= 2, ErrorCategory::kConfig, "config: jepa_batch must be >= 2");
  require(num_points >= 1, ErrorCategory::kConfig, "config: num_points must be >= 1");
  require(tracker_iterations >= 1, ErrorCategory::kConfig,
          "config: tracker_iterations must be >= 1");
  require(frame_step >= 1, ErrorCategory::kConfig, "config: frame_step must be >= 1");
  require(visibility_init >= 0.0 && visibility_init <= 1.0, ErrorCategory::kConfig,
          "config: visibility_init must be in [0, 1]");
}

RunConfig RunConfig::full_scale() {
  RunConfig c;
  c.image_size = 252;
  c.grid = 18;
  c.num_points = occu::kFullScaleNumPoints;
  return c;
}

json config_to_json(const RunConfig& config) {
  json j = json::object();
  visit_fields(config, [&](const char* name, const auto& v) { j[name] = v; });
  return j;
}

RunConfig config_from_json(const json& j, RunConfig base) {
  require(j.is_object(), ErrorCategory::kParse, "config: expected a JSON object");
  std::set<std::string> known;
  visit_fields(base, [&](const char* name, auto& member) {
    known.insert(name);
    if (!j.contains(name)) return;
    try {
      j.at(name).get_to(member);
    } catch (const json::exception&) {
      fail(ErrorCategory::kConfig, std::string("config: wrong type for key ") + name);
    }
  });
  for (const auto& [key, value] : j.items()) {
    require(known.count(key) > 0, ErrorCategory::kConfig, "config: unknown key " + key);
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCategory::kParse, "config: " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, ErrorCategory::kConfig,
          "config: override must look like key=value, got '" + assignment + "'");
  const auto key = assignment.substr(0, eq);
  const auto text = assignment.substr(eq + 1);
  bool found = false;
  visit_fields(config, [&](const char* name, auto& member) {
    if (key != name) return;
    found = true;
    member = parse_value<std::decay_t<decltype(member)>>(key, text);
  });
  require(found, ErrorCategory::kConfig, "config: unknown key " + key);
}

std::string config_hash(const RunConfig& config) {
  return content_hash(config_to_json(config).dump());
}

}  // namespace mptrack::app
