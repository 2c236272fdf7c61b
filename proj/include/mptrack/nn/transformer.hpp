// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

namespace mptrack::nn {

/// Pre-norm transformer encoder block: x + MHSA(LN(x)), then x + FFN(LN(x)).
/// Input and output are [B, N, dim].
class TransformerBlockImpl : public torch::nn::Module {
 public:
  TransformerBlockImpl(int64_t dim, int64_t heads, int64_t ffn_dim);

  torch::Tensor forward(const torch::Tensor& x);

 private:
  int64_t dim_;
  int64_t heads_;
  torch::nn::LayerNorm norm1_{nullptr};
  torch::nn::Linear qkv_{nullptr};
  torch::nn::Linear proj_{nullptr};
  torch::nn::LayerNorm norm2_{nullptr};
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
};
TORCH_MODULE(TransformerBlock);

/// A stack of blocks followed by a final LayerNorm.
class TransformerEncoderImpl : public torch::nn::Module {
 public:
  TransformerEncoderImpl(int64_t dim, int64_t heads, int64_t layers, int64_t ffn_dim);

  torch::Tensor forward(torch::Tensor x);

 private:
  torch::nn::ModuleList blocks_;
  torch::nn::LayerNorm norm_{nullptr};
};
TORCH_MODULE(TransformerEncoder);

/// Sets every parameter's requires_grad flag.
void set_trainable(torch::nn::Module& module, bool trainable);

/// Copies parameters and buffers between modules with identical structure.
void copy_parameters(const torch::nn::Module& from, torch::nn::Module& to);

}  // namespace mptrack::nn
