// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <numbers>
#include <set>

#include "doctest_torch.hpp"
#include "mptrack/common/error.hpp"
#include "mptrack/common/hash.hpp"
#include "mptrack/jepa/corruption.hpp"
#include "mptrack/jepa/losses.hpp"
#include "mptrack/jepa/pretrain.hpp"
#include "mptrack/jepa/student.hpp"
#include "mptrack/synthdata/dataset.hpp"
#include "mptrack/trackhead/feature_bank.hpp"
#include "oracles.hpp"

using namespace mptrack;
using namespace mptrack::jepa;

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

double scalar(const torch::Tensor& t) { return t.item<double>(); }

torch::Tensor rows(std::initializer_list<std::initializer_list<double>> r) {
  std::vector<torch::Tensor> out;
  for (const auto& row : r) out.push_back(torch::tensor(std::vector<double>(row), torch::kDouble));
  return torch::stack(out);
}

struct SmallSetup {
  std::vector<synth::SyntheticSequence> seqs;
  head::TrackerNet teacher{nullptr};
  head::FeatureBank bank;
  std::vector<synth::WindowSpec> windows;
};

SmallSetup small_setup(std::uint64_t seed) {
  SmallSetup s;
  synth::ScenarioOptions opts;
  opts.image_size = 126;
  opts.grid_size = 9;
  opts.num_frames = 20;
  s.seqs = synth::generate_dataset(opts, 3, seed);
  torch::manual_seed(seed);
  s.teacher = head::TrackerNet(head::ModelProfile::small());
  s.teacher->eval();
  s.bank = head::encode_sequences(s.teacher, s.seqs);
  s.windows = synth::enumerate_windows(s.seqs, 1);
  return s;
}

}  // namespace

TEST_SUITE("jepa") {

TEST_CASE("loss_inv examples") {
  CHECK(scalar(loss_inv(rows({{3, 4}}), rows({{0, 0}}))) == 25.0);
  CHECK(scalar(loss_inv(rows({{1, 0}, {0, 2}}), rows({{0, 0}, {0, 0}}))) == 2.5);
  const auto w = torch::randn({5, 8}, torch::kDouble);
  CHECK(scalar(loss_inv(w, w)) == 0.0);
  CHECK(category_of([] { loss_inv(torch::zeros({2, 3}), torch::zeros({2, 4})); }) ==
        ErrorCategory::kShape);
}

TEST_CASE("loss_cov examples") {
  CHECK(scalar(loss_cov(rows({{1, 0}, {-1, 0}}))) == 0.0);
  CHECK(scalar(loss_cov(rows({{1, 1}, {-1, -1}}))) == 4.0);
  const auto same = torch::randn({1, 6}, torch::kDouble).expand({4, 6});
  CHECK(scalar(loss_cov(same)) == 0.0);
  CHECK(category_of([] { loss_cov(torch::zeros({1, 4})); }) == ErrorCategory::kDomain);
}

TEST_CASE("loss_cov matches a hand-rolled covariance") {
  torch::manual_seed(3);
  const auto x = torch::randn({7, 5}, torch::kDouble);
  auto a = x.accessor<double, 2>();
  double mean[5] = {0};
  for (int i = 0; i < 7; ++i) {
    for (int c = 0; c < 5; ++c) mean[c] += a[i][c] / 7.0;
  }
  double sum = 0.0;
  for (int p = 0; p < 5; ++p) {
    for (int q = 0; q < 5; ++q) {
      if (p == q) continue;
      double cov = 0.0;
      for (int i = 0; i < 7; ++i) cov += (a[i][p] - mean[p]) * (a[i][q] - mean[q]);
      cov /= 6.0;
      sum += cov * cov;
    }
  }
  CHECK(scalar(loss_cov(x)) == doctest::Approx(sum / 5.0).epsilon(1e-12));
}

TEST_CASE("loss_mp weighting and accounting") {
  const auto li = torch::tensor(0.1, torch::kDouble), lc = torch::tensor(0.5, torch::kDouble);
  CHECK(std::abs(scalar(loss_mp(li, lc, 25.0, 1.0)) - 3.0) <= 1e-9);
  CHECK(scalar(loss_mp(li, lc, 25.0, 0.0)) == scalar(25.0 * li));
  CHECK(scalar(loss_mp(torch::tensor(0.0), torch::tensor(0.0), 25, 1)) == 0.0);
  CHECK(category_of([&] { loss_mp(li, lc, -1.0, 1.0); }) == ErrorCategory::kConfig);
  CHECK(category_of([&] { loss_mp(li, lc, 1.0, -1.0); }) == ErrorCategory::kConfig);
  torch::manual_seed(4);
  for (int i = 0; i < 20; ++i) {
    const auto r = make_report(torch::rand({}), torch::rand({}), 25.0, 1.0);
    CHECK(std::abs(r.l_mp - (r.alpha * r.l_inv + r.beta * r.l_cov)) <= 1e-12);
  }
}

TEST_CASE("loss gradients match central differences") {
  torch::manual_seed(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto target = torch::randn({4, 6}, torch::kDouble);
    CHECK(oracle::gradient_rel_error(
              [&](const torch::Tensor& x) { return loss_inv(x, target); },
              torch::randn({4, 6}, torch::kDouble)) < 1e-4);
    CHECK(oracle::gradient_rel_error([](const torch::Tensor& x) { return loss_cov(x); },
                                     torch::randn({5, 6}, torch::kDouble)) < 1e-4);
    const auto e = torch::randn({5, 6}, torch::kDouble);
    CHECK(oracle::gradient_rel_error(
              [&](const torch::Tensor& x) {
                return loss_mp(loss_inv(x, target), loss_cov(e * x.sum()), 25.0, 1.0);
              },
              torch::randn({4, 6}, torch::kDouble)) < 1e-4);
  }
}

TEST_CASE("corruption: rho_max 0 is the identity, range is validated") {
  Rng rng(1);
  const auto f = torch::randn({8, 18, 18});
  auto [out, log] = corrupt_features(f, 0.0, rng);
  CHECK(log.k == 0);
  CHECK(torch::equal(out, f));
  CHECK(category_of([&] { corrupt_features(f, 1.5, rng); }) == ErrorCategory::kConfig);
  CHECK(category_of([&] { corrupt_features(f, -0.1, rng); }) == ErrorCategory::kConfig);
}

TEST_CASE("corruption: K, distinctness and copy semantics") {
  Rng rng(2);
  for (int draw = 0; draw < 200; ++draw) {
    const auto f = torch::randn({4, 18, 18});
    const auto before = f.clone();
    auto [out, log] = corrupt_features(f, 0.2, rng);
    CHECK(log.k == static_cast<int>(std::floor(log.rho * 324)));
    CHECK(log.k <= 64);
    std::set<int> s(log.sources.begin(), log.sources.end());
    std::set<int> t(log.targets.begin(), log.targets.end());
    CHECK(static_cast<int>(s.size()) == log.k);
    CHECK(static_cast<int>(t.size()) == log.k);
    CHECK(torch::equal(f, before));
    const auto fo = before.reshape({4, 324}), oo = out.reshape({4, 324});
    for (int k = 0; k < log.k; ++k) {
      CHECK(torch::equal(oo.select(1, log.targets[k]), fo.select(1, log.sources[k])));
    }
    const auto changed = (oo != fo).any(0).sum().item<int64_t>();
    CHECK(changed <= log.k);
  }
  // The maximum: rho = 0.2 on 18 x 18 gives floor(64.8) = 64.
  CHECK(static_cast<int>(std::floor(0.2 * 324)) == 64);
}

TEST_CASE("masking corruption zeroes the target cells") {
  Rng rng(3);
  const auto f = torch::randn({4, 9, 9}) + 5.0;
  auto [out, log] = corrupt_features(f, 0.5, rng, CorruptionKind::kMasking);
  const auto oo = out.reshape({4, 81});
  for (int tgt : log.targets) CHECK(oo.select(1, tgt).abs().sum().item<float>() == 0.0f);
  CHECK((oo != 0).all(0).sum().item<int64_t>() == 81 - log.k);
}

TEST_CASE("expander: linear, zero-bias homogeneous, 4C wide") {
  torch::manual_seed(6);
  Expander e(64, 256, false);
  torch::NoGradGuard guard;
  CHECK(e(torch::zeros({2, 64})).abs().max().item<float>() == 0.0f);
  const auto w = torch::randn({3, 64}, torch::kDouble);
  e->to(torch::kDouble);
  CHECK(oracle::max_abs_diff(e(2.5 * w), 2.5 * e(w)) < 1e-12);
  CHECK(e(w).size(1) == 256);
}

TEST_CASE("teacher is frozen and isolated from student corruption") {
  auto s = small_setup(10);
  JepaModel model(s.teacher, 4, 10);
  const auto grid = s.teacher->profile().grid_spec();
  const std::vector<synth::WindowSpec> chunk(s.windows.begin(), s.windows.begin() + 4);
  const auto batch = head::gather_windows(s.bank, chunk, grid);
  const auto clean = batch.cur.clone();
  const auto a = model.teacher_predict(batch.refs, batch.cur);
  Rng rng(1);
  const auto corrupt = corrupt_batch(batch.cur, 0.2, rng);
  const auto w = model.student_predict(batch.refs, corrupt);
  CHECK(torch::equal(batch.cur, clean));
  const auto b = model.teacher_predict(batch.refs, batch.cur);
  CHECK(torch::equal(a, b));
  CHECK_FALSE(a.requires_grad());
  CHECK(w.size(1) == 64);
}

TEST_CASE("student starts as the teacher with an identity ProjNet") {
  auto s = small_setup(11);
  JepaModel model(s.teacher, 4, 11);
  const auto grid = s.teacher->profile().grid_spec();
  const std::vector<synth::WindowSpec> chunk(s.windows.begin(), s.windows.begin() + 3);
  const auto batch = head::gather_windows(s.bank, chunk, grid);
  torch::NoGradGuard guard;
  const auto raw = model.student()->predict_raw(batch.refs, batch.cur).omega;
  const auto w = model.student_predict(batch.refs, batch.cur);
  CHECK(oracle::max_abs_diff(raw, w) < 1e-6);
  CHECK(oracle::max_abs_diff(w, model.teacher_predict(batch.refs, batch.cur)) < 1e-5);
  CHECK(category_of([] { JepaModel bad(head::TrackerNet(nullptr)); }) == ErrorCategory::kInit);
}

TEST_CASE("l_inv gradient w.r.t. ProjNet matches central differences") {
  auto s = small_setup(12);
  JepaModel model(s.teacher, 4, 12);
  const auto grid = s.teacher->profile().grid_spec();
  const std::vector<synth::WindowSpec> chunk(s.windows.begin(), s.windows.begin() + 4);
  const auto batch = head::gather_windows(s.bank, chunk, grid);
  torch::Tensor raw, target;
  {
    torch::NoGradGuard guard;
    raw = model.student()->predict_raw(batch.refs, batch.cur).omega.to(torch::kDouble);
    target = model.teacher_predict(batch.refs, batch.cur).to(torch::kDouble) +
             0.1 * torch::randn({4, 64}, torch::kDouble);
  }
  auto& proj = model.student()->projnet();
  proj->to(torch::kDouble);
  Rng rng(12);
  const double err = oracle::parameter_gradient_rel_error(
      [&] { return loss_inv(proj(raw), target); }, {proj->weight, proj->bias}, 40, rng);
  CHECK(err < 1e-4);
}

TEST_CASE("pretrain: zero epochs is a no-op; fixed seed reproduces; heldout improves") {
  auto s = small_setup(13);
  std::vector<synth::WindowSpec> heldout(s.windows.end() - 24, s.windows.end());
  std::vector<synth::WindowSpec> train(s.windows.begin(), s.windows.end() - 24);
  PretrainConfig cfg;
  cfg.epochs = 0;
  cfg.batch_size = 8;
  {
    JepaModel model(s.teacher, 4, 1);
    const auto before = parameter_hash(*model.student());
    const auto r = pretrain(model, s.bank, train, s.bank, heldout, cfg);
    CHECK(r.log.empty());
    CHECK(parameter_hash(*model.student()) == before);
  }
  cfg.epochs = 2;
  JepaModel m1(s.teacher, 4, 1), m2(s.teacher, 4, 1);
  // Start the student away from the teacher so there is a gap to close.
  const auto offset = 0.1 * torch::randn_like(m1.student()->projnet()->weight);
  {
    torch::NoGradGuard guard;
    m1.student()->projnet()->weight.add_(offset);
    m2.student()->projnet()->weight.add_(offset);
  }
  const auto r1 = pretrain(m1, s.bank, train, s.bank, heldout, cfg);
  const auto r2 = pretrain(m2, s.bank, train, s.bank, heldout, cfg);
  REQUIRE(r1.log.size() == r2.log.size());
  REQUIRE_FALSE(r1.log.empty());
  for (std::size_t i = 0; i < r1.log.size(); ++i) {
    CHECK(r1.log[i].losses.l_mp == r2.log[i].losses.l_mp);
  }
  CHECK(r1.teacher_hash_before == r1.teacher_hash_after);
  CHECK(r1.heldout.back().l_inv < r1.heldout.front().l_inv);
  for (const auto& rec : r1.log) {
    CHECK(std::abs(rec.losses.l_mp - (25.0 * rec.losses.l_inv + rec.losses.l_cov)) <= 1e-12);
  }
}

TEST_CASE("lr_factor: linear warmup, cosine decay to zero") {
  CHECK(lr_factor(0, 100, 0.1) == doctest::Approx(0.1));
  CHECK(lr_factor(9, 100, 0.1) == doctest::Approx(1.0));
  CHECK(lr_factor(99, 100, 0.1) == doctest::Approx(0.0).scale(1.0));
  CHECK(lr_factor(0, 100, 0.0) == doctest::Approx(std::cos(std::numbers::pi / 100) * 0.5 + 0.5));
  double prev = 2.0;
  for (int s = 9; s < 100; ++s) {
    const double f = lr_factor(s, 100, 0.1);
    CHECK(f <= prev);
    CHECK(f >= 0.0);
    prev = f;
  }
  CHECK(lr_factor(5, 0, 0.1) == 1.0);
}

TEST_CASE("pretrain aborts with the step index on a non-finite loss") {
  auto s = small_setup(14);
  JepaModel model(s.teacher, 4, 1);
  {
    torch::NoGradGuard guard;
    model.expander()->parameters()[0].fill_(std::numeric_limits<float>::infinity());
  }
  PretrainConfig cfg;
  cfg.batch_size = 8;
  try {
    pretrain(model, s.bank, s.windows, s.bank, {}, cfg);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kDivergence);
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

}  // TEST_SUITE
