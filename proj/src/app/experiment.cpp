// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/app/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mptrack/common/error.hpp"
#include "mptrack/synthdata/sequence_io.hpp"

namespace mptrack::app {

using nlohmann::json;

namespace {

bool is_projnet(const std::string& name) { return name.rfind("projnet.", 0) == 0; }

}  // namespace

Checkpoint make_checkpoint(const std::string& kind, const RunConfig& config) {
  Checkpoint ckpt;
  ckpt.metadata = {{"kind", kind},
                   {"profile", head::profile_to_json(config.profile())},
                   {"num_points", config.num_points},
                   {"tracker_iterations", config.tracker_iterations},
                   {"config_hash", config_hash(config)},
                   {"seed", config.seed}};
  return ckpt;
}

void check_profile(const Checkpoint& ckpt, const RunConfig& config) {
  require(ckpt.metadata.contains("profile"), ErrorCategory::kInit,
          "checkpoint has no profile metadata");
  const auto p = head::profile_from_json(ckpt.metadata.at("profile"));
  const auto q = config.profile();
  require(p.image_size == q.image_size && p.grid == q.grid && p.channels == q.channels,
          ErrorCategory::kInit,
          "checkpoint profile " + ckpt.metadata.at("profile").dump() +
              " does not match the configured profile " + head::profile_to_json(q).dump());
  if (ckpt.metadata.contains("num_points")) {
    require(ckpt.metadata.at("num_points").get<int>() == config.num_points,
            ErrorCategory::kInit, "checkpoint num_points does not match the configuration");
  }
}

void add_trackhead(Checkpoint& ckpt, head::TrackerNet& net) { add_module(ckpt, "trackhead", *net); }

head::TrackerNet load_trackhead(const Checkpoint& ckpt, const RunConfig& config) {
  check_profile(ckpt, config);
  require(ckpt.has_prefix("trackhead"), ErrorCategory::kInit,
          "checkpoint has no trackhead entries");
  head::TrackerNet net(config.profile());
  if (ckpt.tensors.count("trackhead/projnet.weight")) net->enable_projnet();
  load_module(ckpt, "trackhead", *net);
  net->eval();
  return net;
}

void add_point_tracker(Checkpoint& ckpt, occu::PointTracker& tracker) {
  add_module(ckpt, "occusolver/frozen", *tracker);
}

occu::PointTracker load_point_tracker(const Checkpoint& ckpt, const RunConfig& config) {
  check_profile(ckpt, config);
  require(ckpt.has_prefix("occusolver/frozen"), ErrorCategory::kInit,
          "checkpoint has no occusolver/frozen entries");
  occu::PointTracker tracker(config.occu_config().tracker);
  load_module(ckpt, "occusolver/frozen", *tracker);
  tracker->eval();
  return tracker;
}

void add_jepa(Checkpoint& ckpt, head::TrackerNet& student, jepa::Expander& expander) {
  add_module(ckpt, "jepa/student", *student, is_projnet);
  add_module(ckpt, "jepa/projnet", *student->projnet());
  add_module(ckpt, "jepa/expander", *expander);
}

head::TrackerNet load_jepa_student(const Checkpoint& ckpt, const RunConfig& config) {
  check_profile(ckpt, config);
  require(ckpt.has_prefix("jepa/student") && ckpt.has_prefix("jepa/projnet"),
          ErrorCategory::kInit, "checkpoint has no jepa/student entries");
  head::TrackerNet net(config.profile());
  net->enable_projnet();
  load_module(ckpt, "jepa/student", *net, is_projnet);
  load_module(ckpt, "jepa/projnet", *net->projnet());
  net->eval();
  return net;
}

void add_occusolver(Checkpoint& ckpt, occu::OccuSolver& solver) {
  add_module(ckpt, "occusolver/frozen", *solver->tracker());
  add_module(ckpt, "occusolver/adapters", *solver->adapters());
}

occu::OccuSolver load_occusolver(const Checkpoint& ckpt, const RunConfig& config) {
  if (!ckpt.has_prefix("occusolver/adapters")) return occu::OccuSolver(nullptr);
  check_profile(ckpt, config);
  occu::OccuSolver solver(config.profile(), config.occu_config());
  load_module(ckpt, "occusolver/frozen", *solver->tracker());
  nn::set_trainable(*solver->tracker(), false);
  load_module(ckpt, "occusolver/adapters", *solver->adapters());
  solver->eval();
  return solver;
}

void write_track_result(const runtime::TrackResult& result, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  for (const auto& r : result.frames) {
    json j = {{"frame", r.frame},
              {"box", synth::box_to_json(r.box)},
              {"score", r.peak_score},
              {"visible_fraction", r.visible_fraction},
              {"occusolver_active", r.occusolver_active}};
    out << j.dump() << "\n";
  }
}

runtime::TrackResult read_track_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open " + path.string());
  runtime::TrackResult result;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      runtime::FrameRecord r;
      r.frame = j.at("frame").get<int>();
      r.box = synth::box_from_json(j.at("box"));
      r.peak_score = j.value("score", 0.0);
      r.visible_fraction = j.value("visible_fraction", 0.0);
      r.occusolver_active = j.value("occusolver_active", false);
      result.frames.push_back(r);
    } catch (const json::exception& e) {
      fail(ErrorCategory::kParse,
           path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return result;
}

AblationData make_ablation_data(const RunConfig& config) {
  AblationData d;
  d.train = make_split(config, Split::kTrain);
  d.heldout = make_split(config, Split::kHeldout);
  d.eval = make_split(config, Split::kEval);
  d.occlusion = make_split(config, Split::kOcclusion);
  return d;
}

Stage0Models run_stage0(const RunConfig& config, const AblationData& data) {
  Stage0Models m;
  m.teacher = train_teacher(config, data.train);
  m.tracker = train_point_tracker(config, data.train);
  return m;
}

namespace {

VariantMetrics variant_metrics(const BenchmarkEval& e) { return {e.overall, e.occlusion_heavy}; }

}  // namespace

SeedOutcome run_ablation_seed(const RunConfig& base, std::uint64_t seed, Stage0Models& stage0,
                              const AblationData& data) {
  RunConfig config = base;
  config.seed = seed;
  SeedOutcome out;
  out.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  auto jepa_full = pretrain_jepa(config, stage0.teacher, data.train, data.heldout);
  RunConfig inv_config = config;
  inv_config.beta = 0.0;
  auto jepa_inv = pretrain_jepa(inv_config, stage0.teacher, data.train, data.heldout);
  out.seconds_pretrain =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.pretrain_full = jepa_full.result;
  out.pretrain_inv_only = jepa_inv.result;

  auto baseline = train_head(config, stage0.teacher, data.train);
  auto head_inv = train_head(config, jepa_inv.student, data.train);
  auto head_full = train_head(config, jepa_full.student, data.train);

  auto occu_baseline = train_occusolver(config, baseline, stage0.tracker, data.train);
  auto occu_full = train_occusolver(config, head_full, stage0.tracker, data.train);
  out.visibility = evaluate_visibility(config, occu_full, data.heldout, 200,
                                       derive_seed(config.data_seed, "visibility-eval"));

  const occu::OccuSolver none(nullptr);
  out.variants["baseline"] = variant_metrics(evaluate_tracker(config, baseline, none, data.eval));
  out.variants["baseline+occu"] =
      variant_metrics(evaluate_tracker(config, baseline, occu_baseline, data.eval));
  out.variants["inv-only"] = variant_metrics(evaluate_tracker(config, head_inv, none, data.eval));
  out.variants["inv+cov"] = variant_metrics(evaluate_tracker(config, head_full, none, data.eval));
  out.variants["full"] =
      variant_metrics(evaluate_tracker(config, head_full, occu_full, data.eval));

  auto occl = evaluate_tracker(config, head_full, occu_full, data.occlusion);
  for (std::size_t i = 0; i < data.occlusion.size(); ++i) {
    const int r = reappearance_frame(data.occlusion[i], config.full_occlusion_frames);
    if (r < 0) continue;
    ++out.recovery_total;
    if (recovered(occl.sequences[i].track, data.occlusion[i], r)) ++out.recovery_hits;
  }
  return out;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

using MetricGetter = double (*)(const metrics::MetricReport&);

const std::vector<std::pair<std::string, MetricGetter>>& metric_getters() {
  static const std::vector<std::pair<std::string, MetricGetter>> g = {
      {"suc", [](const metrics::MetricReport& r) { return r.suc; }},
      {"pr", [](const metrics::MetricReport& r) { return r.pr; }},
      {"npr", [](const metrics::MetricReport& r) { return r.npr; }},
      {"ao", [](const metrics::MetricReport& r) { return r.ao; }},
      {"op50", [](const metrics::MetricReport& r) { return r.op50; }}};
  return g;
}

}  // namespace

json ablation_table(const std::vector<SeedOutcome>& outcomes) {
  json rows = json::array();
  for (const auto& variant : kAblationVariants) {
    json row = {{"variant", variant}};
    for (const auto& subset : {"overall", "heavy"}) {
      json m = json::object();
      for (const auto& [name, get] : metric_getters()) {
        std::vector<double> values;
        for (const auto& o : outcomes) {
          const auto& vm = o.variants.at(variant);
          values.push_back(get(std::string(subset) == "overall" ? vm.overall : vm.heavy));
        }
        const auto s = summarize(values);
        m[name] = {{"mean", s.mean}, {"std", s.std}};
      }
      row[subset] = m;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string ablation_markdown(const std::vector<SeedOutcome>& outcomes) {
  const auto table = ablation_table(outcomes);
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "| variant | SUC | Pr | NPr | AO | OP50 | SUC (occlusion-heavy) |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const auto& row : table) {
    os << "| " << row.at("variant").get<std::string>();
    for (const auto& name : {"suc", "pr", "npr", "ao", "op50"}) {
      const auto& m = row.at("overall").at(name);
      os << " | " << m.at("mean").get<double>() << " ± " << m.at("std").get<double>();
    }
    const auto& h = row.at("heavy").at("suc");
    os << " | " << h.at("mean").get<double>() << " ± " << h.at("std").get<double>() << " |\n";
  }
  return os.str();
}

json seed_outcome_json(const SeedOutcome& o) {
  auto pretrain_json = [](const jepa::PretrainResult& r) {
    json held = json::array();
    for (const auto& h : r.heldout) {
      held.push_back({{"l_inv", h.l_inv}, {"l_cov", h.l_cov}, {"exp_std_min", h.exp_std_min}});
    }
    return json{{"heldout", held},
                {"min_heldout_exp_std", r.min_heldout_exp_std},
                {"collapsed", r.collapsed},
                {"steps", r.log.size()}};
  };
  json variants = json::object();
  for (const auto& [name, vm] : o.variants) {
    variants[name] = {{"overall", metrics::report_to_json(vm.overall)},
                      {"heavy", metrics::report_to_json(vm.heavy)}};
  }
  return {{"seed", o.seed},
          {"variants", variants},
          {"pretrain_full", pretrain_json(o.pretrain_full)},
          {"pretrain_inv_only", pretrain_json(o.pretrain_inv_only)},
          {"visibility", {{"vishead", o.visibility.vishead},
                          {"frozen", o.visibility.frozen},
                          {"samples", o.visibility.samples}}},
          {"recovery", {{"hits", o.recovery_hits}, {"total", o.recovery_total}}},
          {"seconds_pretrain", o.seconds_pretrain}};
}

}  // namespace mptrack::app
