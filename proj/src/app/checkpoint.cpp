// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/app/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "mptrack/common/error.hpp"

namespace mptrack::app {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'P', 'T', 'R', 'A', 'C', 'K', '\0'};

std::string dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "f32";
    case torch::kFloat64: return "f64";
    case torch::kInt64: return "i64";
    default: fail(ErrorCategory::kDomain, "checkpoint: unsupported tensor dtype");
  }
}

torch::ScalarType dtype_from(const std::string& name) {
  if (name == "f32") return torch::kFloat32;
  if (name == "f64") return torch::kFloat64;
  if (name == "i64") return torch::kInt64;
  fail(ErrorCategory::kParse, "checkpoint: unknown dtype " + name);
}

std::map<std::string, torch::Tensor> named_state(const torch::nn::Module& module) {
  std::map<std::string, torch::Tensor> out;
  for (const auto& p : module.named_parameters(true)) out[p.key()] = p.value();
  for (const auto& b : module.named_buffers(true)) out[b.key()] = b.value();
  return out;
}

}  // namespace

bool Checkpoint::has_prefix(const std::string& prefix) const {
  auto it = tensors.lower_bound(prefix + "/");
  return it != tensors.end() && it->first.rfind(prefix + "/", 0) == 0;
}

void add_module(Checkpoint& ckpt, const std::string& prefix, const torch::nn::Module& module,
                const NameFilter& skip) {
  for (const auto& [name, t] : named_state(module)) {
    if (skip && skip(name)) continue;
    ckpt.tensors[prefix + "/" + name] = t.detach().clone().contiguous();
  }
}

void load_module(const Checkpoint& ckpt, const std::string& prefix, torch::nn::Module& module,
                 const NameFilter& skip) {
  torch::NoGradGuard no_grad;
  for (auto& [name, t] : named_state(module)) {
    if (skip && skip(name)) continue;
    const auto key = prefix + "/" + name;
    auto it = ckpt.tensors.find(key);
    require(it != ckpt.tensors.end(), ErrorCategory::kInit, "checkpoint: missing entry " + key);
    require(it->second.sizes() == t.sizes(), ErrorCategory::kInit,
            "checkpoint: shape mismatch for " + key);
    t.copy_(it->second);
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  json meta = ckpt.metadata;
  json entries = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    const auto bytes = static_cast<std::uint64_t>(t.numel() * t.element_size());
    entries.push_back({{"name", name}, {"dtype", dtype_name(t.scalar_type())},
                       {"shape", t.sizes().vec()}, {"offset", offset}, {"bytes", bytes}});
    offset += bytes;
  }
  meta["entries"] = entries;
  const std::string text = meta.dump();
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCategory::kIo, "checkpoint: cannot write " + path.string());
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t len = text.size();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    auto c = t.contiguous();
    out.write(static_cast<const char*>(c.data_ptr()), c.numel() * c.element_size());
  }
  require(static_cast<bool>(out), ErrorCategory::kIo, "checkpoint: write failed " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "checkpoint: cannot open " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, sizeof(magic));
  require(in && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, ErrorCategory::kParse,
          "checkpoint: " + path.string() + " is not a checkpoint file");
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  require(static_cast<bool>(in), ErrorCategory::kParse, "checkpoint: truncated header");
  require(version == kCheckpointVersion, ErrorCategory::kUnsupportedVersion,
          "checkpoint: unsupported version " + std::to_string(version));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  require(in && len < (1ull << 32), ErrorCategory::kParse, "checkpoint: bad metadata length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  require(static_cast<bool>(in), ErrorCategory::kParse, "checkpoint: truncated metadata");

  Checkpoint ckpt;
  try {
    ckpt.metadata = json::parse(text);
    const auto entries = ckpt.metadata.at("entries");
    for (const auto& e : entries) {
      const auto name = e.at("name").get<std::string>();
      const auto shape = e.at("shape").get<std::vector<int64_t>>();
      const auto bytes = e.at("bytes").get<std::uint64_t>();
      auto t = torch::empty(shape, dtype_from(e.at("dtype").get<std::string>()));
      require(static_cast<std::uint64_t>(t.numel() * t.element_size()) == bytes,
              ErrorCategory::kParse, "checkpoint: size mismatch for " + name);
      in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(bytes));
      require(static_cast<bool>(in), ErrorCategory::kParse, "checkpoint: truncated payload");
      ckpt.tensors[name] = t;
    }
  } catch (const json::exception& e) {
    fail(ErrorCategory::kParse, std::string("checkpoint: bad metadata: ") + e.what());
  }
  ckpt.metadata.erase("entries");
  return ckpt;
}

}  // namespace mptrack::app
