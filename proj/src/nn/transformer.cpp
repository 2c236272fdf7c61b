// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/nn/transformer.hpp"

#include <cmath>

#include "mptrack/common/error.hpp"

namespace mptrack::nn {

TransformerBlockImpl::TransformerBlockImpl(int64_t dim, int64_t heads, int64_t ffn_dim)
    : dim_(dim), heads_(heads) {
  require(dim % heads == 0, ErrorCategory::kConfig,
          "transformer dim " + std::to_string(dim) + " not divisible by " +
              std::to_string(heads) + " heads");
  norm1_ = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  qkv_ = register_module("qkv", torch::nn::Linear(dim, 3 * dim));
  proj_ = register_module("proj", torch::nn::Linear(dim, dim));
  norm2_ = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  fc1_ = register_module("fc1", torch::nn::Linear(dim, ffn_dim));
  fc2_ = register_module("fc2", torch::nn::Linear(ffn_dim, dim));
}

torch::Tensor TransformerBlockImpl::forward(const torch::Tensor& x) {
  const int64_t b = x.size(0);
  const int64_t n = x.size(1);
  const int64_t head_dim = dim_ / heads_;

  auto qkv = qkv_(norm1_(x)).reshape({b, n, 3, heads_, head_dim}).permute({2, 0, 3, 1, 4});
  const auto q = qkv[0];
  const auto k = qkv[1];
  const auto v = qkv[2];
  const auto mixed =
      at::scaled_dot_product_attention(q, k, v).permute({0, 2, 1, 3}).reshape({b, n, dim_});
  auto y = x + proj_(mixed);
  return y + fc2_(torch::gelu(fc1_(norm2_(y))));
}

TransformerEncoderImpl::TransformerEncoderImpl(int64_t dim, int64_t heads, int64_t layers,
                                               int64_t ffn_dim) {
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  for (int64_t i = 0; i < layers; ++i) blocks_->push_back(TransformerBlock(dim, heads, ffn_dim));
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
}

torch::Tensor TransformerEncoderImpl::forward(torch::Tensor x) {
  for (const auto& block : *blocks_) x = block->as<TransformerBlock>()->forward(x);
  return norm_(x);
}

void set_trainable(torch::nn::Module& module, bool trainable) {
  for (auto& p : module.parameters(/*recurse=*/true)) p.set_requires_grad(trainable);
}

void copy_parameters(const torch::nn::Module& from, torch::nn::Module& to) {
  torch::NoGradGuard no_grad;
  const auto src = from.named_parameters(true);
  auto dst = to.named_parameters(true);
  require(src.size() == dst.size(), ErrorCategory::kShape,
          "copy_parameters: parameter count mismatch");
  for (const auto& item : src) {
    auto* target = dst.find(item.key());
    require(target != nullptr && target->sizes() == item.value().sizes(), ErrorCategory::kShape,
            "copy_parameters: no matching parameter for " + item.key());
    target->copy_(item.value());
  }
  const auto src_buffers = from.named_buffers(true);
  auto dst_buffers = to.named_buffers(true);
  for (const auto& item : src_buffers) {
    if (auto* target = dst_buffers.find(item.key())) target->copy_(item.value());
  }
}

}  // namespace mptrack::nn
