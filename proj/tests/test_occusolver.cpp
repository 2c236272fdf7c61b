// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest_torch.hpp"
#include "mptrack/common/error.hpp"
#include "mptrack/nn/transformer.hpp"
#include "mptrack/occusolver/adapters.hpp"
#include "mptrack/occusolver/energy.hpp"
#include "mptrack/occusolver/occusolver.hpp"
#include "mptrack/synthdata/labels.hpp"
#include "mptrack/trackhead/tracker_net.hpp"
#include "oracles.hpp"

using namespace mptrack;
using namespace mptrack::occu;

namespace {

const head::ModelProfile kSmall = head::ModelProfile::small();

ErrorCategory category_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  FAIL("expected an mptrack::Error");
  return ErrorCategory::kIo;
}

void randomize(torch::nn::Module& m, double scale = 0.2) {
  torch::NoGradGuard guard;
  for (auto& p : m.parameters()) p.normal_(0.0, scale);
}

OccuInput random_input(int64_t b, int p, Rng& rng) {
  OccuInput in;
  in.images = torch::rand({b, 8, 1, 126, 126});
  auto c = torch::empty({b, p, 1, 2}).uniform_(20, 100);
  in.coords0 = c.expand({b, p, 8, 2}).contiguous();
  const synth::GridSpec grid = kSmall.grid_spec();
  const Box box{uniform(rng, 20, 40), uniform(rng, 20, 40), 90, 90};
  auto prior = synth::encode_cls_label(box, grid).values.unsqueeze(0).expand({b, 9, 9});
  in.prior_first = prior.contiguous();
  in.prior_middle = prior.contiguous();
  in.z_cur = torch::randn({b, 64, 9, 9});
  return in;
}

}  // namespace

TEST_SUITE("occusolver") {

TEST_CASE("query points: containment, determinism, degenerate boxes") {
  const Box box{20.5, 30, 60, 50};
  Rng a(3), b(3);
  const auto pa = sample_query_points(box, 64, a);
  const auto pb = sample_query_points(box, 64, b);
  CHECK(torch::equal(pa, pb));
  CHECK(pa.sizes() == torch::IntArrayRef{64, 2});
  CHECK((pa.select(1, 0) >= box.x0).all().item<bool>());
  CHECK((pa.select(1, 0) <= box.x1).all().item<bool>());
  CHECK((pa.select(1, 1) >= box.y0).all().item<bool>());
  CHECK((pa.select(1, 1) <= box.y1).all().item<bool>());
  Rng c(4);
  const auto one = sample_query_points({10, 10, 11, 11}, 1, c);
  CHECK(static_cast<int>(one[0][0].item<float>()) == 10);
  CHECK(static_cast<int>(one[0][1].item<float>()) == 10);
  CHECK(category_of([&] { sample_query_points({5, 5, 5, 9}, 4, c); }) == ErrorCategory::kDomain);
  CHECK(category_of([&] { sample_query_points(box, 0, c); }) == ErrorCategory::kDomain);
}

TEST_CASE("prior injection: identity for zero prior, placement, injectivity") {
  torch::manual_seed(5);
  PriorEncoder enc(kSmall.grid_spec(), 32);
  randomize(*enc);
  const auto feats = torch::randn({2, 8, 32, 31, 31});
  {
    PriorEncoder zero_bias(kSmall.grid_spec(), 32);
    randomize(*zero_bias);
    torch::NoGradGuard guard;
    for (auto& item : zero_bias->named_parameters()) {
      if (item.key().find("bias") != std::string::npos) item.value().zero_();
    }
    const auto out = inject_prior(zero_bias, feats.select(1, 0), torch::zeros({2, 9, 9}));
    CHECK(torch::equal(out, feats.select(1, 0)));
  }
  torch::NoGradGuard guard;
  const auto pa = synth::encode_cls_label({20, 20, 60, 60}, kSmall.grid_spec()).values;
  const auto pb = synth::encode_cls_label({60, 50, 110, 100}, kSmall.grid_spec()).values;
  const auto prior_a = pa.unsqueeze(0).expand({2, 9, 9}).contiguous();
  const auto prior_b = pb.unsqueeze(0).expand({2, 9, 9}).contiguous();
  const auto out = inject_window_priors(enc, feats, prior_a, prior_b);
  CHECK(middle_frame_index(8) == 3);
  for (int t = 0; t < 8; ++t) {
    const bool same = torch::equal(out.select(1, t), feats.select(1, t));
    if (t == 0 || t == 3) {
      CHECK_FALSE(same);
    } else {
      CHECK(same);
    }
  }
  CHECK_FALSE(torch::equal(inject_prior(enc, feats.select(1, 0), prior_a),
                           inject_prior(enc, feats.select(1, 0), prior_b)));
  CHECK(category_of([&] { inject_prior(enc, feats.select(1, 0), torch::zeros({2, 8, 8})); }) ==
        ErrorCategory::kShape);
}

TEST_CASE("point tracker: M = 0 is a no-op; window length enforced") {
  torch::manual_seed(6);
  PointTracker tracker;
  tracker->eval();
  torch::NoGradGuard guard;
  const auto images = torch::rand({1, 8, 1, 126, 126});
  const auto feats = tracker->features(images);
  const auto coords0 = torch::empty({1, 4, 1, 2}).uniform_(20, 100).expand({1, 4, 8, 2});
  const auto q0 = tracker->initial_appearance(feats, coords0.select(2, 0));
  const auto out = tracker->iterate(coords0, q0, feats, 0);
  CHECK(out.q_history.empty());
  CHECK(out.delta_coords.abs().max().item<float>() == 0.0f);
  CHECK(torch::equal(out.coords, coords0));
  CHECK(torch::equal(out.delta_q, q0.unsqueeze(2).expand_as(out.delta_q)));
  const auto full = tracker->iterate(coords0, q0, feats, 4);
  CHECK(full.q_history.size() == 4);
  CHECK(category_of([&] {
          tracker->iterate(coords0.slice(2, 0, 6), q0, feats.slice(1, 0, 6), 2);
        }) == ErrorCategory::kShape);
  const auto vis = tracker->visibility(full.delta_q);
  CHECK((vis >= 0).all().item<bool>());
  CHECK((vis <= 1).all().item<bool>());
}

TEST_CASE("ladder: zero-init ScaleNet passes delta_q through; empty history rejected") {
  torch::manual_seed(7);
  LightTrans light(32, 16, 8);
  ScaleNet scale(16, 32);
  const auto dq = torch::randn({2, 4, 8, 32});
  std::vector<torch::Tensor> hist{torch::randn({2, 4, 8, 32}), torch::randn({2, 4, 8, 32})};
  const auto q = ladder_refine(light, scale, hist, dq);
  CHECK(q.sizes() == dq.sizes());
  CHECK(torch::equal(q, dq));
  CHECK(category_of([&] { ladder_refine(light, scale, {}, dq); }) == ErrorCategory::kDomain);
}

TEST_CASE("gradients reach the adapters but never the frozen tracker") {
  torch::manual_seed(8);
  Rng rng(8);
  OccuSolver solver(kSmall, OccuSolverConfig{});
  solver->freeze_tracker();
  randomize(*solver->adapters(), 0.05);
  const auto in = random_input(1, 16, rng);
  const auto out = solver->forward(in);
  const auto loss = out.vis_prob.sum() + out.fused.z_tilde.square().mean() +
                    out.q_cond.square().mean();
  loss.backward();
  for (const auto& p : solver->tracker()->parameters()) {
    CHECK_FALSE(p.requires_grad());
    CHECK_FALSE(p.grad().defined());
  }
  auto has_grad = [](torch::nn::Module& m) {
    for (const auto& p : m.parameters()) {
      if (p.grad().defined() && p.grad().abs().sum().item<double>() > 0) return true;
    }
    return false;
  };
  auto& a = *solver->adapters();
  CHECK(has_grad(*a.light_trans));
  CHECK(has_grad(*a.scale_net));
  CHECK(has_grad(*a.vis_head));
  CHECK(has_grad(*a.prior_encoder));
  CHECK(has_grad(*a.fusion));
  CHECK(has_grad(*a.ensemble));
}

TEST_CASE("frozen-core hash is stable across adapter updates") {
  torch::manual_seed(9);
  Rng rng(9);
  OccuSolver solver(kSmall, OccuSolverConfig{});
  solver->freeze_tracker();
  const auto before = solver->frozen_hash();
  torch::optim::AdamW opt(solver->adapters()->parameters(), torch::optim::AdamWOptions(1e-2));
  for (int step = 0; step < 2; ++step) {
    const auto out = solver->forward(random_input(1, 16, rng));
    const auto loss = out.vis_prob.mean() + out.fused.z_tilde.mean();
    opt.zero_grad();
    loss.backward();
    opt.step();
  }
  CHECK(solver->frozen_hash() == before);
}

TEST_CASE("VisHead: range and decision rule") {
  torch::manual_seed(10);
  VisHead head(32);
  randomize(*head, 1.0);
  const auto p = head(torch::randn({100, 32}) * 10);
  CHECK((p >= 0).all().item<bool>());
  CHECK((p <= 1).all().item<bool>());
  const auto b = binarize_visibility(torch::tensor({0.2, 0.5, 0.5001, 0.9}));
  CHECK_FALSE(b[0].item<bool>());
  CHECK_FALSE(b[1].item<bool>());
  CHECK(b[2].item<bool>());
  CHECK(b[3].item<bool>());
}

TEST_CASE("energy: peak, negation, involution and clamping") {
  const synth::GridSpec grid{9, 9, 14};
  // Cell (2, 6) center: x = 6.5 * 14, y = 2.5 * 14.
  auto coords = torch::tensor({6.5 * 14, 2.5 * 14, 40.0, 70.0}, torch::kFloat).reshape({1, 2, 2});
  auto vis = torch::tensor({true, true}).reshape({1, 2});
  const auto e = map_points_to_energy(coords, vis, grid);
  CHECK(e.sizes() == torch::IntArrayRef{1, 2, 9, 9});
  CHECK(e[0][0][2][6].item<float>() == 1.0f);
  CHECK(e[0][0].max().item<float>() == 1.0f);
  auto hidden = vis.clone();
  hidden[0][0] = false;
  const auto en = map_points_to_energy(coords, hidden, grid);
  CHECK(en[0][0][2][6].item<float>() == 0.0f);
  CHECK(en[0][0][8][0].item<float>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(torch::equal(en[0][0], 1.0 - e[0][0]));
  CHECK(torch::equal(en[0][1], e[0][1]));
  // Flipping twice restores the map bit for bit.
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = torch::empty({2, 6, 2}).uniform_(0, 126);
    auto v = torch::rand({2, 6}) > 0.5;
    const auto a = map_points_to_energy(c, v, grid);
    const auto b = map_points_to_energy(c, v.logical_not(), grid);
    CHECK(torch::equal(b, 1.0 - a));
    CHECK(torch::equal(1.0 - b, a));
  }
  int clamped = 0;
  auto outside = torch::tensor({-30.0, 50.0, 200.0, 200.0}, torch::kFloat).reshape({1, 2, 2});
  const auto eo = map_points_to_energy(outside, vis, grid, 1.0, &clamped);
  CHECK(clamped == 2);
  CHECK(torch::isfinite(eo).all().item<bool>());
}

TEST_CASE("fusion and ensemble: shapes, purity, residual start") {
  torch::manual_seed(12);
  Fusion fusion(16, 64, 9, 9);
  Ensemble ens(64);
  fusion->eval();
  torch::NoGradGuard guard;
  const auto energy = torch::rand({2, 16, 9, 9});
  const auto z = torch::randn({2, 64, 9, 9});
  const auto et = fusion(energy, z);
  CHECK(et.sizes() == z.sizes());
  CHECK(torch::equal(et, fusion(energy, z)));
  CHECK(torch::equal(ens(et, z), z));
  CHECK(category_of([&] { fusion(energy, torch::randn({2, 64, 8, 8})); }) ==
        ErrorCategory::kShape);
  CHECK(category_of([&] { ens(et, torch::randn({2, 64, 8, 8})); }) == ErrorCategory::kShape);
}

TEST_CASE("dual-supervision loss accounting") {
  OccuLossComponents zero;
  CHECK(combine_occu_losses(zero, {}) == 0.0);
  const double l0 = 0.37;
  OccuLossComponents same{l0, l0, l0, l0, 0.0};
  CHECK(std::abs(combine_occu_losses(same, {}) - 301.5 * l0) <= 1e-9);

  torch::manual_seed(13);
  head::RegDec regdec(64);
  const auto omega = torch::randn({2, 64});
  const auto e = torch::randn({2, 64, 9, 9}), z = torch::randn({2, 64, 9, 9});
  std::vector<Box> boxes{{20, 20, 60, 70}, {50, 40, 100, 90}};
  const auto labels = head::encode_label_batch(boxes, kSmall.grid_spec());
  const auto loss = occusolver_loss(regdec, omega, e, z, labels.cls, labels.reg, labels.valid);
  const auto& c = loss.components;
  CHECK(c.total == combine_occu_losses(c, {}));
  const double total = loss.total.item<double>();
  CHECK(total == doctest::Approx(c.total).epsilon(1e-6));
  CHECK(category_of([&] {
          occusolver_loss(regdec, omega, e, torch::randn({2, 64, 8, 8}), labels.cls, labels.reg,
                          labels.valid);
        }) == ErrorCategory::kShape);
}

}  // TEST_SUITE
