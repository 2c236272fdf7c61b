// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/jepa/losses.hpp"

#include "mptrack/common/error.hpp"

namespace mptrack::jepa {

torch::Tensor loss_inv(const torch::Tensor& omega, const torch::Tensor& omega_hat) {
  require(omega.dim() == 2 && omega.sizes() == omega_hat.sizes() && omega.size(0) >= 1,
          ErrorCategory::kShape, "loss_inv: expected matching [n, C] batches with n >= 1");
  return (omega - omega_hat).square().sum(1).mean();
}

torch::Tensor loss_cov(const torch::Tensor& omega_exp) {
  require(omega_exp.dim() == 2, ErrorCategory::kShape, "loss_cov: expected an [n, c] batch");
  const int64_t n = omega_exp.size(0);
  const int64_t c = omega_exp.size(1);
  require(n >= 2, ErrorCategory::kDomain, "loss_cov: covariance needs n >= 2, got n = " +
                                              std::to_string(n));
  const auto centered = omega_exp - omega_exp.mean(0, /*keepdim=*/true);
  const auto cov = torch::matmul(centered.t(), centered) / static_cast<double>(n - 1);
  const auto off_diagonal = cov.square().sum() - cov.diagonal().square().sum();
  return off_diagonal / static_cast<double>(c);
}

torch::Tensor loss_mp(const torch::Tensor& l_inv, const torch::Tensor& l_cov, double alpha,
                      double beta) {
  require(alpha >= 0.0 && beta >= 0.0, ErrorCategory::kConfig,
          "loss_mp: alpha and beta must be non-negative");
  return alpha * l_inv + beta * l_cov;
}

}  // namespace mptrack::jepa
