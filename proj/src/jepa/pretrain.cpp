// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/jepa/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mptrack/common/error.hpp"
#include "mptrack/common/rng.hpp"

namespace mptrack::jepa {
namespace {

constexpr int kHeldoutBatch = 32;

std::vector<torch::Tensor> params_of(torch::nn::Module& m) { return m.parameters(true); }

}  // namespace

JepaLossReport make_report(const torch::Tensor& l_inv, const torch::Tensor& l_cov, double alpha,
                           double beta) {
  JepaLossReport r;
  r.alpha = alpha;
  r.beta = beta;
  r.l_inv = l_inv.item<double>();
  r.l_cov = l_cov.item<double>();
  r.l_mp = alpha * r.l_inv + beta * r.l_cov;
  return r;
}

double lr_factor(int step, int total_steps, double warmup_fraction) {
  if (total_steps <= 0) return 1.0;
  const double warmup = warmup_fraction * total_steps;
  const double t = step + 1.0;
  if (t <= warmup) return t / warmup;
  const double progress = (t - warmup) / std::max(1.0, total_steps - warmup);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(1.0, progress)));
}

HeldoutStats evaluate_heldout(JepaModel& model, const head::FeatureBank& bank,
                              std::span<const synth::WindowSpec> windows,
                              const PretrainConfig& config, std::uint64_t seed) {
  torch::NoGradGuard no_grad;
  Rng rng(derive_seed(seed, "heldout-corruption"));
  const auto grid = model.teacher()->profile().grid_spec();
  std::vector<torch::Tensor> omegas, hats, exps;
  for (std::size_t i = 0; i < windows.size(); i += kHeldoutBatch) {
    const auto chunk = windows.subspan(i, std::min<std::size_t>(kHeldoutBatch, windows.size() - i));
    const auto batch = head::gather_windows(bank, chunk, grid);
    const auto corrupt = corrupt_batch(batch.cur, config.rho_max, rng, config.corruption);
    hats.push_back(model.teacher_predict(batch.refs, batch.cur));
    auto omega = model.student_predict(batch.refs, corrupt);
    exps.push_back(model.expand(omega));
    omegas.push_back(omega);
  }
  const auto omega = torch::cat(omegas);
  const auto exp = torch::cat(exps);
  HeldoutStats s;
  s.l_inv = loss_inv(omega, torch::cat(hats)).item<double>();
  s.l_cov = exp.size(0) >= 2 ? loss_cov(exp).item<double>() : 0.0;
  s.exp_std_min = exp.size(0) >= 2 ? exp.std(0).min().item<double>() : 0.0;
  return s;
}

PretrainResult pretrain(JepaModel& model, const head::FeatureBank& train,
                        std::span<const synth::WindowSpec> train_windows,
                        const head::FeatureBank& heldout,
                        std::span<const synth::WindowSpec> heldout_windows,
                        const PretrainConfig& config) {
  require(config.epochs >= 0 && config.batch_size >= 2, ErrorCategory::kConfig,
          "pretrain: epochs must be >= 0 and batch_size >= 2");
  require(config.alpha >= 0.0 && config.beta >= 0.0, ErrorCategory::kConfig,
          "pretrain: alpha and beta must be non-negative");
  require(!train_windows.empty(), ErrorCategory::kConfig, "pretrain: no training windows");
  require(config.warmup_fraction >= 0.0 && config.warmup_fraction <= 1.0, ErrorCategory::kConfig,
          "pretrain: warmup_fraction must be in [0, 1]");

  PretrainResult result;
  result.teacher_hash_before = model.teacher_hash();
  const auto grid = model.teacher()->profile().grid_spec();
  const std::uint64_t eval_seed = derive_seed(config.seed, "heldout");

  auto& student = model.student();
  auto& expander = model.expander();
  student->train();
  // Only label encoder, predictor, ProjNet and Expander are optimized; the
  // frame encoder and RegDec stay untouched during pretraining.
  std::vector<torch::Tensor> base = params_of(*student->label_encoder());
  for (auto& p : params_of(*student->predictor())) base.push_back(p);
  std::vector<torch::Tensor> projection = params_of(*student->projnet());
  for (auto& p : params_of(*expander)) projection.push_back(p);

  std::vector<torch::optim::OptimizerParamGroup> groups;
  groups.emplace_back(base, std::make_unique<torch::optim::AdamWOptions>(
                                torch::optim::AdamWOptions(config.lr_base)
                                    .weight_decay(config.weight_decay)));
  groups.emplace_back(projection, std::make_unique<torch::optim::AdamWOptions>(
                                      torch::optim::AdamWOptions(config.lr_projection)
                                          .weight_decay(config.weight_decay)));
  torch::optim::AdamW optimizer(groups);

  auto record_heldout = [&] {
    if (heldout_windows.empty()) return;
    result.heldout.push_back(evaluate_heldout(model, heldout, heldout_windows, config, eval_seed));
  };
  record_heldout();

  Rng rng(derive_seed(config.seed, "pretrain"));
  std::vector<synth::WindowSpec> order(train_windows.begin(), train_windows.end());
  const int total_steps =
      config.epochs * static_cast<int>(order.size() / static_cast<std::size_t>(config.batch_size));
  const double base_lrs[2] = {config.lr_base, config.lr_projection};
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i + config.batch_size <= order.size(); i += config.batch_size) {
      const std::span<const synth::WindowSpec> chunk(order.data() + i, config.batch_size);
      const auto batch = head::gather_windows(train, chunk, grid);
      const auto corrupt = corrupt_batch(batch.cur, config.rho_max, rng, config.corruption);
      const auto omega_hat = model.teacher_predict(batch.refs, batch.cur);
      const auto omega = model.student_predict(batch.refs, corrupt);
      const auto omega_exp = model.expand(omega);
      const auto l_inv = loss_inv(omega, omega_hat);
      const auto l_cov = loss_cov(omega_exp);
      const auto l_mp = loss_mp(l_inv, l_cov, config.alpha, config.beta);
      if (!std::isfinite(l_mp.item<double>())) {
        fail(ErrorCategory::kDivergence,
             "pretrain diverged: non-finite loss at step " + std::to_string(step));
      }
      const double factor = lr_factor(step, total_steps, config.warmup_fraction);
      for (std::size_t g = 0; g < 2; ++g) {
        static_cast<torch::optim::AdamWOptions&>(optimizer.param_groups()[g].options())
            .lr(base_lrs[g] * factor);
      }
      optimizer.zero_grad();
      l_mp.backward();
      optimizer.step();

      PretrainLogRecord rec;
      rec.step = step;
      rec.losses = make_report(l_inv.detach(), l_cov.detach(), config.alpha, config.beta);
      const auto stds = omega.detach().std(0);
      rec.omega_std_min = stds.min().item<double>();
      rec.omega_std_mean = stds.mean().item<double>();
      result.log.push_back(rec);
      ++step;
    }
    record_heldout();
  }
  student->eval();

  result.teacher_hash_after = model.teacher_hash();
  result.min_heldout_exp_std = result.heldout.empty() ? 0.0 : result.heldout.front().exp_std_min;
  for (const auto& h : result.heldout) {
    result.min_heldout_exp_std = std::min(result.min_heldout_exp_std, h.exp_std_min);
  }
  result.collapsed = !result.heldout.empty() && config.beta > 0.0 &&
                     result.min_heldout_exp_std < kCollapseStdFloor;
  return result;
}

}  // namespace mptrack::jepa
