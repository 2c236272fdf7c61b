// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>

#include "doctest_torch.hpp"
#include "mptrack/app/checkpoint.hpp"
#include "mptrack/app/config.hpp"
#include "mptrack/app/experiment.hpp"
#include "mptrack/app/manifest.hpp"
#include "mptrack/app/training.hpp"
#include "mptrack/common/error.hpp"
#include "mptrack/common/hash.hpp"

using namespace mptrack;
using namespace mptrack::app;
namespace fs = std::filesystem;

namespace {

ErrorCategory category_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an mptrack::Error");
  return ErrorCategory::kIo;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mptrack-app-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool same_parameters(torch::nn::Module& a, torch::nn::Module& b) {
  const auto pa = a.named_parameters();
  const auto pb = b.named_parameters();
  if (pa.size() != pb.size()) return false;
  for (const auto& item : pa) {
    const auto* other = pb.find(item.key());
    if (other == nullptr || !torch::equal(item.value(), *other)) return false;
  }
  return true;
}

synth::SyntheticSequence occluded_sequence() {
  synth::SynthConfig cfg;
  cfg.image_size = 126;
  cfg.grid_size = 9;
  cfg.num_frames = 16;
  cfg.target.width = 30;
  cfg.target.height = 30;
  cfg.occluders = {{4, 10, 1.0}};
  cfg.seed = 5;
  return synth::generate_sequence(cfg);
}

}  // namespace

TEST_SUITE("app") {

TEST_CASE("config: JSON round trip, overrides, unknown keys") {
  RunConfig c;
  c.num_frames = 40;
  c.corruption = "masking";
  c.beta = 0.0;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));

  apply_override(c, "teacher_lr=0.002");
  apply_override(c, "eval_sequences=7");
  apply_override(c, "corruption=copy-paste");
  CHECK(c.teacher_lr == 0.002);
  CHECK(c.eval_sequences == 7);
  CHECK(c.corruption == "copy-paste");
  CHECK(config_hash(c) != config_hash(back));

  CHECK(category_of([&] { apply_override(c, "no_such_key=1"); }) == ErrorCategory::kConfig);
  CHECK(category_of([&] { apply_override(c, "eval_sequences=many"); }) ==
        ErrorCategory::kConfig);
  CHECK(category_of([&] { apply_override(c, "missing-equals"); }) == ErrorCategory::kConfig);
  CHECK(category_of([] { config_from_json({{"bogus", 1}}); }) == ErrorCategory::kConfig);

  RunConfig bad;
  bad.max_window_step = 10;
  bad.num_frames = 64;
  CHECK(category_of([&] { bad.validate(); }) == ErrorCategory::kConfig);
  RunConfig{}.validate();
  RunConfig::full_scale().validate();
  CHECK(RunConfig::full_scale().num_points == occu::kFullScaleNumPoints);
}

TEST_CASE("config file loading") {
  const auto dir = scratch("config");
  {
    std::ofstream(dir / "ok.json") << R"({"seed": 4, "eval_sequences": 3})";
    std::ofstream(dir / "broken.json") << R"({"seed": )";
  }
  const auto c = load_config(dir / "ok.json");
  CHECK(c.seed == 4);
  CHECK(c.eval_sequences == 3);
  CHECK(c.train_sequences == RunConfig{}.train_sequences);
  CHECK(category_of([&] { load_config(dir / "broken.json"); }) == ErrorCategory::kParse);
  CHECK(category_of([&] { load_config(dir / "absent.json"); }) == ErrorCategory::kIo);
}

TEST_CASE("checkpoint: tracker head round trip and profile check") {
  const auto dir = scratch("ckpt");
  RunConfig cfg;
  torch::manual_seed(3);
  head::TrackerNet net(cfg.profile());
  auto ckpt = make_checkpoint("trackhead", cfg);
  add_trackhead(ckpt, net);
  save_checkpoint(ckpt, dir / "model.ckpt");
  const auto loaded = load_checkpoint(dir / "model.ckpt");
  CHECK(loaded.metadata["kind"] == "trackhead");
  auto net2 = load_trackhead(loaded, cfg);
  CHECK(same_parameters(*net, *net2));
  CHECK_FALSE(net2->has_projnet());

  RunConfig other = cfg;
  other.image_size = 252;
  other.grid = 18;
  CHECK(category_of([&] { check_profile(loaded, other); }) == ErrorCategory::kInit);
  CHECK(category_of([&] { load_trackhead(loaded, other); }) == ErrorCategory::kInit);
  CHECK(category_of([&] { load_checkpoint(dir / "absent.ckpt"); }) == ErrorCategory::kIo);

  // Damage: truncation and a foreign version number.
  std::ifstream in(dir / "model.ckpt", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  {
    std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    auto v = bytes;
    v[8] = 9;
    std::ofstream(dir / "version.ckpt", std::ios::binary) << v;
    std::ofstream(dir / "magic.ckpt", std::ios::binary) << "not a checkpoint at all";
  }
  CHECK(category_of([&] { load_checkpoint(dir / "short.ckpt"); }) == ErrorCategory::kParse);
  CHECK(category_of([&] { load_checkpoint(dir / "version.ckpt"); }) ==
        ErrorCategory::kUnsupportedVersion);
  CHECK(category_of([&] { load_checkpoint(dir / "magic.ckpt"); }) == ErrorCategory::kParse);

  Checkpoint partial = loaded;
  partial.tensors.erase(partial.tensors.begin());
  CHECK(category_of([&] { load_trackhead(partial, cfg); }) == ErrorCategory::kInit);
}

TEST_CASE("checkpoint: JEPA student and OccuSolver round trip") {
  const auto dir = scratch("ckpt2");
  RunConfig cfg;
  torch::manual_seed(4);
  head::TrackerNet student(cfg.profile());
  student->enable_projnet();
  jepa::Expander expander(cfg.channels, 4 * cfg.channels);
  auto ck = make_checkpoint("jepa", cfg);
  add_jepa(ck, student, expander);
  save_checkpoint(ck, dir / "jepa.ckpt");
  auto student2 = load_jepa_student(load_checkpoint(dir / "jepa.ckpt"), cfg);
  CHECK(student2->has_projnet());
  CHECK(same_parameters(*student, *student2));

  occu::OccuSolver solver(cfg.profile(), cfg.occu_config());
  solver->freeze_tracker();
  auto co = make_checkpoint("occusolver", cfg);
  add_occusolver(co, solver);
  save_checkpoint(co, dir / "occu.ckpt");
  auto solver2 = load_occusolver(load_checkpoint(dir / "occu.ckpt"), cfg);
  REQUIRE_FALSE(solver2.is_empty());
  CHECK(solver2->frozen_hash() == solver->frozen_hash());
  CHECK(same_parameters(*solver->adapters(), *solver2->adapters()));
  CHECK(load_occusolver(make_checkpoint("trackhead", cfg), cfg).is_empty());
}

TEST_CASE("manifest: content hashes track file contents") {
  const auto dir = scratch("manifest");
  std::ofstream(dir / "a.txt") << "alpha";
  fs::create_directories(dir / "d");
  std::ofstream(dir / "d" / "x.txt") << "x";
  std::ofstream(dir / "d" / "y.txt") << "y";
  const auto ha = path_hash(dir / "a.txt");
  const auto hd = path_hash(dir / "d");
  CHECK(ha == path_hash(dir / "a.txt"));
  std::ofstream(dir / "a.txt") << "beta";
  CHECK(ha != path_hash(dir / "a.txt"));
  std::ofstream(dir / "d" / "y.txt") << "z";
  CHECK(hd != path_hash(dir / "d"));

  RunConfig cfg;
  auto m = make_manifest("synth", cfg);
  add_input(m, dir / "a.txt");
  add_output(m, dir / "d");
  write_manifest(m, dir);
  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["command"] == "synth");
  CHECK(j["config_hash"] == config_hash(cfg));
  CHECK(j.dump().find(path_hash(dir / "a.txt")) != std::string::npos);
}

TEST_CASE("track results: round trip and located parse errors") {
  const auto dir = scratch("track");
  runtime::TrackResult r;
  for (int t = 0; t < 5; ++t) {
    runtime::FrameRecord f;
    f.frame = t;
    f.box = {1.25 * t, 2.0, 30.5 + t, 40.0};
    f.peak_score = 0.1 * t;
    f.visible_fraction = 1.0 - 0.2 * t;
    f.occusolver_active = t % 2 == 0;
    r.frames.push_back(f);
  }
  write_track_result(r, dir / "track.jsonl");
  const auto back = read_track_result(dir / "track.jsonl");
  REQUIRE(back.frames.size() == r.frames.size());
  for (std::size_t t = 0; t < r.frames.size(); ++t) {
    CHECK(back.frames[t].frame == r.frames[t].frame);
    CHECK(back.frames[t].box == r.frames[t].box);
    CHECK(back.frames[t].peak_score == r.frames[t].peak_score);
    CHECK(back.frames[t].visible_fraction == r.frames[t].visible_fraction);
    CHECK(back.frames[t].occusolver_active == r.frames[t].occusolver_active);
  }
  std::ofstream(dir / "bad.jsonl") << R"({"frame": 0, "box": [0, 0, 1, 1], "score": 1})"
                                   << "\n{oops\n";
  try {
    read_track_result(dir / "bad.jsonl");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kParse);
    CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
  }
}

TEST_CASE("recovery bookkeeping after a full occlusion") {
  const auto seq = occluded_sequence();
  const int r = reappearance_frame(seq, 3);
  CHECK(r == 10);
  CHECK(reappearance_frame(seq, 7) == -1);
  runtime::TrackResult perfect, lost;
  for (int t = 0; t < seq.num_frames(); ++t) {
    perfect.frames.push_back({t, seq.gt_boxes[t], 1.0, 1.0, false});
    lost.frames.push_back({t, {0, 0, 5, 5}, 1.0, 1.0, false});
  }
  CHECK(recovered(perfect, seq, r));
  CHECK_FALSE(recovered(lost, seq, r));
  CHECK_FALSE(recovered(perfect, seq, -1));
  // The window is [r, r + within].
  auto late = lost;
  late.frames[15].box = seq.gt_boxes[15];
  CHECK_FALSE(recovered(late, seq, r, 4));
  CHECK(recovered(late, seq, r));
}

TEST_CASE("summary statistics") {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
  CHECK(summarize({7.0}).std == 0.0);
}

}  // TEST_SUITE
