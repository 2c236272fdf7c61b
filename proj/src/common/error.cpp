// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/common/error.hpp"

namespace mptrack {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kShape: return "shape";
    case ErrorCategory::kDomain: return "domain";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kUnsupportedVersion: return "unsupported_version";
    case ErrorCategory::kState: return "state";
    case ErrorCategory::kInit: return "init";
    case ErrorCategory::kDivergence: return "divergence";
    case ErrorCategory::kPrerequisite: return "prerequisite";
    case ErrorCategory::kIo: return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) {
  return 10 + static_cast<int>(category);
}

void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace mptrack
