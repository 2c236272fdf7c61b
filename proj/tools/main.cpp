// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

// mptrack command-line front end. Every command reads a RunConfig (file plus
// --set overrides), writes its artifacts into a directory of its own and
// leaves a manifest.json next to them.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mptrack/app/checkpoint.hpp"
#include "mptrack/app/config.hpp"
#include "mptrack/app/experiment.hpp"
#include "mptrack/app/manifest.hpp"
#include "mptrack/app/training.hpp"
#include "mptrack/common/error.hpp"
#include "mptrack/metrics/evaluation.hpp"
#include "mptrack/synthdata/sequence_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mptrack;
using namespace mptrack::app;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides, "key=value override (repeatable)");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig config = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
  for (const auto& o : args.overrides) apply_override(config, o);
  config.validate();
  return config;
}

void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

fs::path artifact_dir(const RunConfig& config, const std::string& name) {
  return fs::path(config.checkpoint_dir) / name;
}

// A directory argument resolves to <dir>/model.ckpt.
fs::path checkpoint_file(const fs::path& p) {
  return fs::is_directory(p) ? p / "model.ckpt" : p;
}

fs::path require_artifact(const fs::path& path, const std::string& producer) {
  const fs::path file = checkpoint_file(path);
  require(fs::exists(file), ErrorCategory::kPrerequisite,
          "missing " + file.string() + "; run `mptrack " + producer + "` first");
  return file;
}

void log(const std::string& line) { std::cerr << line << std::endl; }

// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& config, const std::vector<std::string>& splits) {
  configure_torch();
  const fs::path root = config.data_dir;
  auto m = make_manifest("synth", config);
  for (const auto& name : splits) {
    const Split split = split_from_string(name);
    const auto seqs = make_split(config, split);
    const fs::path dir = root / name;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "seq_%03zu", i);
      synth::save_sequence(seqs[i], dir / buf);
    }
    add_output(m, dir);
    log("synth: wrote " + std::to_string(seqs.size()) + " sequences to " + dir.string());
  }
  write_manifest(m, root);
  return 0;
}

int cmd_train_stage0(const RunConfig& config) {
  configure_torch();
  const auto train = make_split(config, Split::kTrain);
  std::vector<EpochLog> teacher_log, tracker_log;
  auto teacher = train_teacher(config, train, &teacher_log);
  auto tracker = train_point_tracker(config, train, &tracker_log);

  const fs::path dir = artifact_dir(config, "stage0");
  auto ckpt = make_checkpoint("stage0", config);
  add_trackhead(ckpt, teacher);
  add_point_tracker(ckpt, tracker);
  save_checkpoint(ckpt, dir / "model.ckpt");

  json jlog = {{"teacher", json::array()}, {"point_tracker", json::array()}};
  for (const auto& e : teacher_log) jlog["teacher"].push_back({{"epoch", e.epoch}, {"loss", e.loss}});
  for (const auto& e : tracker_log) {
    jlog["point_tracker"].push_back({{"epoch", e.epoch}, {"loss", e.loss}});
  }
  write_json(jlog, dir / "train_log.json");

  auto m = make_manifest("train-stage0", config);
  add_output(m, dir / "model.ckpt");
  add_output(m, dir / "train_log.json");
  write_manifest(m, dir);
  log("train-stage0: wrote " + (dir / "model.ckpt").string());
  return 0;
}

int cmd_pretrain_jepa(const RunConfig& config, const std::string& name) {
  configure_torch();
  const fs::path stage0 = require_artifact(artifact_dir(config, "stage0"), "train-stage0");
  const auto ckpt_in = load_checkpoint(stage0);
  auto teacher = load_trackhead(ckpt_in, config);

  const auto train = make_split(config, Split::kTrain);
  const auto heldout = make_split(config, Split::kHeldout);
  auto outcome = pretrain_jepa(config, teacher, train, heldout);

  const fs::path dir = artifact_dir(config, "jepa-" + name);
  auto ckpt = make_checkpoint("jepa", config);
  add_jepa(ckpt, outcome.student, outcome.expander);
  save_checkpoint(ckpt, dir / "model.ckpt");

  const auto& r = outcome.result;
  json held = json::array();
  for (const auto& h : r.heldout) {
    held.push_back({{"l_inv", h.l_inv}, {"l_cov", h.l_cov}, {"exp_std_min", h.exp_std_min}});
  }
  json steps = json::array();
  for (const auto& rec : r.log) {
    steps.push_back({{"step", rec.step},
                     {"l_inv", rec.losses.l_inv},
                     {"l_cov", rec.losses.l_cov},
                     {"l_mp", rec.losses.l_mp},
                     {"omega_std_min", rec.omega_std_min},
                     {"omega_std_mean", rec.omega_std_mean}});
  }
  write_json({{"heldout", held},
              {"steps", steps},
              {"min_heldout_exp_std", r.min_heldout_exp_std},
              {"collapsed", r.collapsed},
              {"teacher_hash_before", r.teacher_hash_before},
              {"teacher_hash_after", r.teacher_hash_after}},
             dir / "pretrain_log.json");

  auto m = make_manifest("pretrain-jepa", config);
  add_input(m, stage0);
  add_output(m, dir / "model.ckpt");
  add_output(m, dir / "pretrain_log.json");
  m.extra["name"] = name;
  m.extra["collapsed"] = r.collapsed;
  write_manifest(m, dir);
  log("pretrain-jepa: wrote " + (dir / "model.ckpt").string() +
      (r.collapsed ? " (collapse detected)" : ""));
  return 0;
}

int cmd_train_head(const RunConfig& config, const std::string& variant, const std::string& jepa) {
  configure_torch();
  head::TrackerNet init{nullptr};
  fs::path input;
  if (variant == "baseline") {
    input = require_artifact(artifact_dir(config, "stage0"), "train-stage0");
    init = load_trackhead(load_checkpoint(input), config);
  } else if (variant == "jepa") {
    input = require_artifact(artifact_dir(config, "jepa-" + jepa),
                             "pretrain-jepa --name " + jepa);
    init = load_jepa_student(load_checkpoint(input), config);
  } else {
    fail(ErrorCategory::kConfig, "unknown head variant '" + variant + "' (baseline|jepa)");
  }
  const auto train = make_split(config, Split::kTrain);
  std::vector<EpochLog> epochs;
  auto net = train_head(config, init, train, &epochs);

  const std::string name = variant == "baseline" ? "baseline" : jepa;
  const fs::path dir = artifact_dir(config, "head-" + name);
  auto ckpt = make_checkpoint("head", config);
  ckpt.metadata["variant"] = variant;
  add_trackhead(ckpt, net);
  save_checkpoint(ckpt, dir / "model.ckpt");

  auto m = make_manifest("train-head", config);
  add_input(m, input);
  add_output(m, dir / "model.ckpt");
  m.extra["variant"] = variant;
  json losses = json::array();
  for (const auto& e : epochs) losses.push_back({{"epoch", e.epoch}, {"loss", e.loss}});
  m.extra["epochs"] = losses;
  write_manifest(m, dir);
  log("train-head: wrote " + (dir / "model.ckpt").string());
  return 0;
}

int cmd_train_occusolver(const RunConfig& config, const std::string& head_name) {
  configure_torch();
  const fs::path stage0 = require_artifact(artifact_dir(config, "stage0"), "train-stage0");
  const fs::path head_path = require_artifact(artifact_dir(config, "head-" + head_name),
                                              "train-head");
  auto net = load_trackhead(load_checkpoint(head_path), config);
  auto tracker = load_point_tracker(load_checkpoint(stage0), config);

  const auto train = make_split(config, Split::kTrain);
  const auto heldout = make_split(config, Split::kHeldout);
  std::vector<OccuTrainLog> steps;
  auto solver = train_occusolver(config, net, tracker, train, &steps);
  const auto acc = evaluate_visibility(config, solver, heldout, 200,
                                       derive_seed(config.data_seed, "visibility-eval"));

  const fs::path dir = artifact_dir(config, "occusolver-" + head_name);
  auto ckpt = make_checkpoint("occusolver", config);
  add_trackhead(ckpt, net);
  add_occusolver(ckpt, solver);
  save_checkpoint(ckpt, dir / "model.ckpt");

  auto m = make_manifest("train-occusolver", config);
  add_input(m, stage0);
  add_input(m, head_path);
  add_output(m, dir / "model.ckpt");
  m.extra["visibility_accuracy"] = {
      {"vishead", acc.vishead}, {"frozen", acc.frozen}, {"samples", acc.samples}};
  if (!steps.empty()) {
    const auto& last = steps.back();
    m.extra["final_loss"] = {{"total", last.components.total}, {"vis_bce", last.vis_bce}};
  }
  write_manifest(m, dir);
  log("train-occusolver: wrote " + (dir / "model.ckpt").string() + " (VisHead accuracy " +
      std::to_string(acc.vishead) + ", frozen " + std::to_string(acc.frozen) + ")");
  return 0;
}

struct TrackArgs {
  std::string checkpoint;
  std::string sequence;
  std::string split = "eval";
  int index = 0;
  std::string out;
};

synth::SyntheticSequence select_sequence(const RunConfig& config, const TrackArgs& a,
                                         fs::path* source) {
  if (!a.sequence.empty()) {
    *source = a.sequence;
    return synth::load_sequence(a.sequence);
  }
  auto seqs = make_split(config, split_from_string(a.split));
  require(a.index >= 0 && a.index < static_cast<int>(seqs.size()), ErrorCategory::kConfig,
          "--index " + std::to_string(a.index) + " outside split '" + a.split + "' of size " +
              std::to_string(seqs.size()));
  return std::move(seqs[a.index]);
}

int cmd_track(const RunConfig& config, const TrackArgs& a) {
  configure_torch();
  const fs::path ckpt_path = require_artifact(a.checkpoint, "train-head` or `mptrack train-occusolver");
  const auto ckpt = load_checkpoint(ckpt_path);
  auto net = load_trackhead(ckpt, config);
  auto solver = load_occusolver(ckpt, config);
  fs::path source;
  const auto seq = select_sequence(config, a, &source);

  auto options = config.tracker_options();
  options.use_occusolver = !solver.is_empty();
  runtime::Tracker tracker(net, solver, options);
  const auto result = tracker.run(seq);

  const fs::path out = a.out.empty() ? fs::path(config.report_dir) / "track" / "predictions.jsonl"
                                     : fs::path(a.out);
  write_track_result(result, out);
  auto m = make_manifest("track", config);
  add_input(m, ckpt_path);
  if (!source.empty()) add_input(m, source);
  m.extra["split"] = a.sequence.empty() ? json(a.split) : json(nullptr);
  m.extra["index"] = a.index;
  add_output(m, out);
  write_manifest(m, out.has_parent_path() ? out.parent_path() : fs::path("."));
  log("track: wrote " + out.string());
  return 0;
}

struct EvalArgs {
  std::string predictions;
  std::string sequence;
  std::string checkpoint;
  std::string split = "eval";
  std::string name = "eval";
};

json heavy_json(const BenchmarkEval& e) {
  return {{"count", e.heavy_count}, {"report", metrics::report_to_json(e.occlusion_heavy)}};
}

int cmd_eval(const RunConfig& config, const EvalArgs& a) {
  configure_torch();
  const fs::path dir = fs::path(config.report_dir) / a.name;
  auto m = make_manifest("eval", config);
  json report;
  metrics::MetricReport overall;
  if (!a.predictions.empty()) {
    require(!a.sequence.empty(), ErrorCategory::kConfig,
            "eval --predictions needs --sequence <dir> for the ground truth");
    const auto seq = synth::load_sequence(a.sequence);
    const auto track = read_track_result(a.predictions);
    require(static_cast<int>(track.frames.size()) == seq.num_frames(), ErrorCategory::kShape,
            "prediction file has " + std::to_string(track.frames.size()) +
                " frames, sequence has " + std::to_string(seq.num_frames()));
    overall = metrics::eval_sequence(to_predictions(track), seq.gt_boxes, config.eval_options());
    report = {{"overall", metrics::report_to_json(overall)}};
    add_input(m, a.predictions);
    add_input(m, a.sequence);
  } else {
    require(!a.checkpoint.empty(), ErrorCategory::kConfig,
            "eval needs --predictions or --checkpoint");
    const fs::path ckpt_path =
        require_artifact(a.checkpoint, "train-head` or `mptrack train-occusolver");
    const auto ckpt = load_checkpoint(ckpt_path);
    auto net = load_trackhead(ckpt, config);
    auto solver = load_occusolver(ckpt, config);
    const auto seqs = make_split(config, split_from_string(a.split));
    const auto e = evaluate_tracker(config, net, solver, seqs);
    overall = e.overall;
    json per = json::array();
    for (const auto& s : e.sequences) per.push_back(metrics::report_to_json(s.report));
    report = {{"overall", metrics::report_to_json(e.overall)},
              {"occlusion_heavy", heavy_json(e)},
              {"sequences", per},
              {"split", a.split},
              {"occusolver", !solver.is_empty()}};
    add_input(m, ckpt_path);
  }
  report["config_hash"] = config_hash(config);
  write_json(report, dir / "report.json");
  metrics::write_curve_tables(overall, dir, "overall");
  add_output(m, dir / "report.json");
  write_manifest(m, dir);
  std::cout << metrics::report_to_json(overall).dump() << std::endl;
  return 0;
}

int cmd_ablate(RunConfig config, int seeds) {
  configure_torch();
  require(seeds >= 1, ErrorCategory::kConfig, "--seeds must be >= 1");
  const auto data = make_ablation_data(config);
  log("ablate: training stage-0 models");
  auto stage0 = run_stage0(config, data);
  const fs::path dir = fs::path(config.report_dir) / "ablation";
  std::vector<SeedOutcome> outcomes;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(s);
    log("ablate: seed " + std::to_string(seed));
    outcomes.push_back(run_ablation_seed(config, seed, stage0, data));
    write_json(seed_outcome_json(outcomes.back()), dir / ("seed_" + std::to_string(seed) + ".json"));
  }
  write_json(ablation_table(outcomes), dir / "table.json");
  const std::string md = ablation_markdown(outcomes);
  {
    std::ofstream out(dir / "table.md");
    out << md;
  }
  auto m = make_manifest("ablate", config);
  m.extra["seeds"] = seeds;
  add_output(m, dir / "table.json");
  add_output(m, dir / "table.md");
  write_manifest(m, dir);
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mptrack: JEPA-pretrained single-object tracker with occlusion-aware refinement"};
  app.require_subcommand(1);

  CommonArgs common;
  std::vector<std::string> splits = {"train", "heldout", "eval", "occlusion"};
  std::string jepa_name = "full";
  std::string variant = "baseline";
  std::string head_name = "baseline";
  TrackArgs track_args;
  EvalArgs eval_args;
  int seeds = 3;

  auto* synth_cmd = app.add_subcommand("synth", "generate and save the synthetic splits");
  add_common(synth_cmd, common);
  synth_cmd->add_option("--split", splits, "splits to write");

  auto* stage0_cmd =
      app.add_subcommand("train-stage0", "train the teacher tracker and the frozen point tracker");
  add_common(stage0_cmd, common);

  auto* jepa_cmd = app.add_subcommand("pretrain-jepa", "JEPA pretraining of the student predictor");
  add_common(jepa_cmd, common);
  jepa_cmd->add_option("--name", jepa_name, "artifact name (jepa-<name>)");

  auto* head_cmd = app.add_subcommand("train-head", "fine-tune the tracking head");
  add_common(head_cmd, common);
  head_cmd->add_option("--variant", variant, "baseline | jepa")
      ->check(CLI::IsMember({"baseline", "jepa"}));
  head_cmd->add_option("--jepa", jepa_name, "pretrain-jepa artifact name for --variant jepa");

  auto* occu_cmd = app.add_subcommand("train-occusolver", "train the OccuSolver adapters");
  add_common(occu_cmd, common);
  occu_cmd->add_option("--head", head_name, "train-head artifact name (head-<name>)");

  auto* track_cmd = app.add_subcommand("track", "run the online tracker on one sequence");
  add_common(track_cmd, common);
  track_cmd->add_option("--checkpoint", track_args.checkpoint, "checkpoint file or directory")
      ->required();
  track_cmd->add_option("--sequence", track_args.sequence, "saved sequence directory");
  track_cmd->add_option("--split", track_args.split, "generated split when no --sequence");
  track_cmd->add_option("--index", track_args.index, "sequence index within --split");
  track_cmd->add_option("-o,--out", track_args.out, "predictions file (JSON lines)");

  auto* eval_cmd = app.add_subcommand("eval", "score predictions or a checkpoint");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--predictions", eval_args.predictions, "predictions file (JSON lines)");
  eval_cmd->add_option("--sequence", eval_args.sequence, "ground-truth sequence directory");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file or directory");
  eval_cmd->add_option("--split", eval_args.split, "split to evaluate with --checkpoint");
  eval_cmd->add_option("--name", eval_args.name, "report subdirectory");

  auto* ablate_cmd = app.add_subcommand("ablate", "run the ablation matrix over several seeds");
  add_common(ablate_cmd, common);
  ablate_cmd->add_option("--seeds", seeds, "number of seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig config = resolve_config(common);
    if (*synth_cmd) return cmd_synth(config, splits);
    if (*stage0_cmd) return cmd_train_stage0(config);
    if (*jepa_cmd) return cmd_pretrain_jepa(config, jepa_name);
    if (*head_cmd) return cmd_train_head(config, variant, jepa_name);
    if (*occu_cmd) return cmd_train_occusolver(config, head_name);
    if (*track_cmd) return cmd_track(config, track_args);
    if (*eval_cmd) return cmd_eval(config, eval_args);
    if (*ablate_cmd) return cmd_ablate(config, seeds);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "]: " << e.what() << std::endl;
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
