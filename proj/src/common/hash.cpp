// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/common/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <memory>
#include <vector>

#include "mptrack/common/error.hpp"

namespace mptrack {
namespace {

class Sha1 {
 public:
  Sha1() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    require(ctx_ != nullptr, ErrorCategory::kInit, "EVP_MD_CTX_new failed");
    EVP_DigestInit_ex(ctx_.get(), EVP_sha1(), nullptr);
  }

  void update(const void* data, std::size_t size) {
    EVP_DigestUpdate(ctx_.get(), data, size);
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len);
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kDigits[digest[i] >> 4]);
      out.push_back(kDigits[digest[i] & 0xf]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string blob_hash(const void* data, std::size_t size) {
  Sha1 sha;
  const std::string header = "blob " + std::to_string(size);
  sha.update(header.data(), header.size() + 1);  // includes the NUL
  sha.update(data, size);
  return sha.hex();
}

}  // namespace

std::string content_hash(std::span<const std::byte> bytes) {
  return blob_hash(bytes.data(), bytes.size());
}

std::string content_hash(std::string_view text) {
  return blob_hash(text.data(), text.size());
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::kIo, "cannot open " + path.string());
  std::vector<char> data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return blob_hash(data.data(), data.size());
}

std::string parameter_hash(const torch::nn::Module& module) {
  std::vector<char> buffer;
  auto append = [&buffer](const std::string& name, const torch::Tensor& t) {
    buffer.insert(buffer.end(), name.begin(), name.end());
    buffer.push_back('\0');
    const torch::Tensor c = t.detach().contiguous().cpu();
    const auto* p = static_cast<const char*>(c.data_ptr());
    buffer.insert(buffer.end(), p, p + c.numel() * c.element_size());
  };
  for (const auto& item : module.named_parameters(/*recurse=*/true)) {
    append(item.key(), item.value());
  }
  for (const auto& item : module.named_buffers(/*recurse=*/true)) {
    append(item.key(), item.value());
  }
  return blob_hash(buffer.data(), buffer.size());
}

}  // namespace mptrack
