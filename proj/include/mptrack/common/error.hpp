// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mptrack {

/// Machine-parsable failure classes. The CLI prints the category name and
/// maps it to a distinct exit code.
enum class ErrorCategory {
  kConfig,
  kShape,
  kDomain,
  kParse,
  kUnsupportedVersion,
  kState,
  kInit,
  kDivergence,
  kPrerequisite,
  kIo,
};

std::string_view to_string(ErrorCategory category);
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& message);

inline void require(bool condition, ErrorCategory category,
                    const std::string& message) {
  if (!condition) fail(category, message);
}

}  // namespace mptrack
