// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "mptrack/runtime/fifo_window.hpp"

#include "mptrack/common/error.hpp"

namespace mptrack::runtime {

FifoWindow::FifoWindow(int capacity) : capacity_(capacity) {
  require(capacity >= 1, ErrorCategory::kConfig, "fifo window: capacity must be >= 1");
}

std::vector<int> FifoWindow::candidate(int frame_id) const {
  if (slots_.empty()) return std::vector<int>(capacity_, frame_id);
  std::vector<int> out;
  for (std::size_t i = 1; i < slots_.size(); ++i) out.push_back(slots_[i].frame_id);
  out.push_back(frame_id);
  return out;
}

int FifoWindow::push(int frame_id, bool occluded) {
  WindowSlot slot{frame_id, false};
  if (occluded && last_unoccluded_) {
    slot = {*last_unoccluded_, true};
  } else if (!occluded) {
    last_unoccluded_ = frame_id;
  }
  if (slots_.empty()) {
    slots_.assign(capacity_, slot);
  } else {
    slots_.pop_front();
    slots_.push_back(slot);
  }
  return slot.frame_id;
}

void FifoWindow::reset() {
  slots_.clear();
  last_unoccluded_.reset();
}

std::vector<int> FifoWindow::ids() const {
  std::vector<int> out;
  for (const auto& s : slots_) out.push_back(s.frame_id);
  return out;
}

}  // namespace mptrack::runtime
