// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

namespace mptrack::jepa {

inline constexpr double kDefaultAlpha = 25.0;
inline constexpr double kDefaultBeta = 1.0;

/// Mean over the batch of the squared L2 distance between student and
/// teacher tracking models. Both [n, C].
torch::Tensor loss_inv(const torch::Tensor& omega, const torch::Tensor& omega_hat);

/// Sum of squared off-diagonal entries of the unbiased batch covariance of
/// [n, c] expanded models, divided by c. Requires n >= 2.
torch::Tensor loss_cov(const torch::Tensor& omega_exp);

/// alpha * l_inv + beta * l_cov; negative weights are rejected.
torch::Tensor loss_mp(const torch::Tensor& l_inv, const torch::Tensor& l_cov, double alpha,
                      double beta);

struct JepaLossReport {
  double l_inv = 0.0;
  double l_cov = 0.0;
  double l_mp = 0.0;
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
};

}  // namespace mptrack::jepa
