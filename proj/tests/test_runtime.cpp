// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest_torch.hpp"
#include "mptrack/common/error.hpp"
#include "mptrack/runtime/fifo_window.hpp"
#include "mptrack/runtime/tracker.hpp"
#include "mptrack/synthdata/sequence.hpp"

using namespace mptrack;
using namespace mptrack::runtime;

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

synth::SyntheticSequence small_sequence(int frames, std::vector<synth::OccluderSpec> occ = {}) {
  synth::SynthConfig cfg;
  cfg.image_size = 126;
  cfg.grid_size = 9;
  cfg.num_frames = frames;
  cfg.target.width = 36;
  cfg.target.height = 30;
  cfg.target.vx = 1.0;
  cfg.target.vy = 0.5;
  cfg.occluders = std::move(occ);
  cfg.seed = 21;
  return synth::generate_sequence(cfg);
}

/// Reports the first `visible` of the P points as visible on every frame.
VisibilityOracle fixed_oracle(int visible) {
  return [visible](const std::vector<int>& ids, const torch::Tensor& coords) {
    auto out = torch::zeros({coords.size(0), static_cast<int64_t>(ids.size())});
    out.slice(0, 0, visible).fill_(1.0);
    return out;
  };
}

struct Nets {
  head::TrackerNet net{nullptr};
  occu::OccuSolver occu{nullptr};
};

Nets make_nets(std::uint64_t seed) {
  torch::manual_seed(seed);
  Nets n;
  n.net = head::TrackerNet(head::ModelProfile::small());
  n.occu = occu::OccuSolver(head::ModelProfile::small(), occu::OccuSolverConfig{});
  n.occu->freeze_tracker();
  return n;
}

}  // namespace

TEST_SUITE("runtime") {

TEST_CASE("fifo: first push fills, later pushes shift") {
  FifoWindow w(4);
  CHECK(w.empty());
  CHECK(w.candidate(3) == std::vector<int>{3, 3, 3, 3});
  CHECK(w.push(0, false) == 0);
  CHECK(w.full());
  CHECK(w.ids() == std::vector<int>{0, 0, 0, 0});
  w.push(8, false);
  w.push(16, false);
  CHECK(w.ids() == std::vector<int>{0, 0, 8, 16});
  CHECK(w.candidate(24) == std::vector<int>{0, 8, 16, 24});
  CHECK(w.ids() == std::vector<int>{0, 0, 8, 16});
  CHECK(category_of([] { FifoWindow bad(0); }) == ErrorCategory::kConfig);
}

TEST_CASE("fifo: occluded frames are replaced by the last unoccluded one") {
  FifoWindow w(4);
  w.push(0, false);
  w.push(8, false);
  CHECK(w.push(16, true) == 8);
  CHECK(w.push(24, true) == 8);
  CHECK(w.ids() == std::vector<int>{0, 8, 8, 8});
  CHECK(w.slots().back().duplicate);
  CHECK_FALSE(w.slots()[1].duplicate);
  CHECK(w.push(32, false) == 32);
  CHECK(w.last_unoccluded() == 32);
  // No unoccluded frame yet: the frame enters as is.
  FifoWindow fresh(3);
  CHECK(fresh.push(5, true) == 5);
  CHECK_FALSE(fresh.last_unoccluded().has_value());
  fresh.reset();
  CHECK(fresh.empty());
}

TEST_CASE("ground-truth visibility oracle follows the occluders") {
  const auto seq = small_sequence(8, {{0, 3, 1.0}});
  const auto oracle = ground_truth_oracle(seq);
  const Box b = seq.gt_boxes[1];
  auto coords = torch::tensor({b.center_x(), b.center_y(), b.center_x(), b.center_y()},
                              torch::kFloat)
                    .reshape({1, 2, 2});
  const auto vis = oracle({1, 4}, coords);
  CHECK(vis[0][0].item<float>() == 0.0f);
  CHECK(vis[0][1].item<float>() == (seq.point_visible(4, b.center_x(), b.center_y()) ? 1.0f
                                                                                      : 0.0f));
  auto outside = torch::tensor({-5.0f, 10.0f}).reshape({1, 1, 2});
  CHECK(oracle({1}, outside)[0][0].item<float>() == 0.0f);
}

TEST_CASE("OccuSolver engages only when enough of the target is visible") {
  const auto seq = small_sequence(8);
  auto nets = make_nets(31);
  TrackerOptions opts;
  const int p = opts.num_points;
  struct Case {
    int visible;
    bool active;
  };
  // 85% of 16 points is 13.6.
  for (const Case c : {Case{p, true}, Case{14, true}, Case{13, false},
                       Case{static_cast<int>(0.2 * p), false}}) {
    Tracker tracker(nets.net, nets.occu, opts);
    tracker.set_visibility_oracle(fixed_oracle(c.visible));
    tracker.init(seq.frames[0], seq.gt_boxes[0]);
    CHECK(tracker.state().occusolver_active == c.active);
    CHECK(tracker.state().visible_fraction == doctest::Approx(double(c.visible) / p));
  }
  opts.use_occusolver = false;
  Tracker plain(nets.net, nets.occu, opts);
  plain.init(seq.frames[0], seq.gt_boxes[0]);
  CHECK_FALSE(plain.state().occusolver_active);
}

TEST_CASE("reference slots: initial frame twice, slot 0 fixed, slot 1 gated by confidence") {
  const auto seq = small_sequence(8);
  auto nets = make_nets(32);
  for (const double thr : {1e9, -1e9}) {
    TrackerOptions opts;
    opts.confidence_threshold = thr;
    Tracker tracker(nets.net, nets.occu, opts);
    tracker.init(seq.frames[0], seq.gt_boxes[0]);
    const auto& st = tracker.state();
    CHECK(st.slot_frames[0] == 0);
    CHECK(st.slot_frames[1] == 0);
    CHECK(torch::equal(st.slot_features[0], st.slot_features[1]));
    const auto slot0 = st.slot_features[0].clone();
    for (int t = 1; t < 6; ++t) tracker.step(seq.frames[t], t);
    CHECK(st.slot_frames[0] == 0);
    CHECK(torch::equal(st.slot_features[0], slot0));
    CHECK(st.slot_boxes[0] == seq.gt_boxes[0]);
    CHECK(st.slot_frames[1] == (thr > 0 ? 0 : 5));
  }
}

TEST_CASE("window frames are spaced by the frame step") {
  const auto seq = small_sequence(25);
  auto nets = make_nets(33);
  TrackerOptions opts;
  opts.frame_step = 8;
  Tracker tracker(nets.net, nets.occu, opts);
  tracker.set_visibility_oracle(fixed_oracle(opts.num_points));
  tracker.init(seq.frames[0], seq.gt_boxes[0]);
  REQUIRE(tracker.state().occusolver_active);
  for (int t = 1; t < 25; ++t) tracker.step(seq.frames[t], t);
  CHECK(tracker.state().fifo.ids() == std::vector<int>{0, 0, 0, 0, 0, 8, 16, 24});

  // Fully hidden windows are filled with the last unoccluded frame.
  Tracker hidden(nets.net, nets.occu, opts);
  hidden.set_visibility_oracle(fixed_oracle(opts.num_points));
  hidden.init(seq.frames[0], seq.gt_boxes[0]);
  hidden.set_visibility_oracle(fixed_oracle(0));
  for (int t = 1; t < 25; ++t) hidden.step(seq.frames[t], t);
  CHECK(hidden.state().fifo.ids() == std::vector<int>(8, 0));
  CHECK(hidden.state().fifo.slots().back().duplicate);
}

TEST_CASE("run: one record per frame, deterministic, frame 0 is the given box") {
  const auto seq = small_sequence(12);
  auto nets = make_nets(34);
  Tracker a(nets.net, nets.occu), b(nets.net, nets.occu);
  const auto ra = a.run(seq);
  const auto rb = b.run(seq);
  REQUIRE(ra.frames.size() == 12);
  CHECK(ra.frames[0].box == seq.gt_boxes[0]);
  for (std::size_t t = 0; t < ra.frames.size(); ++t) {
    CHECK(ra.frames[t].frame == static_cast<int>(t));
    CHECK(ra.frames[t].box == rb.frames[t].box);
    CHECK(ra.frames[t].peak_score == rb.frames[t].peak_score);
    CHECK(ra.frames[t].box.valid());
    CHECK(ra.frames[t].box.inside(126, 126));
  }
}

TEST_CASE("tracker errors") {
  const auto seq = small_sequence(8);
  auto nets = make_nets(35);
  Tracker tracker(nets.net, nets.occu);
  CHECK(category_of([&] { tracker.step(seq.frames[1], 1); }) == ErrorCategory::kState);
  CHECK(category_of([&] { tracker.init(seq.frames[0], {10, 10, 5, 20}); }) ==
        ErrorCategory::kDomain);
  CHECK(category_of([&] { tracker.init(seq.frames[0], {100, 100, 140, 120}); }) ==
        ErrorCategory::kDomain);
  occu::OccuSolver standard(head::ModelProfile::standard(), occu::OccuSolverConfig{});
  CHECK(category_of([&] { Tracker bad(nets.net, standard); }) == ErrorCategory::kInit);
  TrackerOptions opts;
  opts.num_points = 8;
  CHECK(category_of([&] { Tracker bad(nets.net, nets.occu, opts); }) == ErrorCategory::kInit);
  synth::SynthConfig big;
  big.num_frames = 8;
  big.seed = 2;
  const auto large = synth::generate_sequence(big);
  CHECK(category_of([&] { tracker.run(large); }) == ErrorCategory::kInit);
  opts = {};
  opts.frame_step = 0;
  CHECK(category_of([&] { Tracker bad(nets.net, nets.occu, opts); }) == ErrorCategory::kConfig);
}

}  // TEST_SUITE
