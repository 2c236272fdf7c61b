// Copyright 2026 The mptrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <optional>
#include <vector>

namespace mptrack::runtime {

inline constexpr int kDefaultFrameStep = 8;

struct WindowSlot {
  int frame_id = 0;
  bool duplicate = false;
};

/// Fixed-length FIFO of frame ids fed to the point tracker. The first push
/// fills every slot with that frame; afterwards each push drops the oldest
/// slot. An occluded frame is replaced by the last unoccluded one.
class FifoWindow {
 public:
  FifoWindow() : FifoWindow(8) {}
  explicit FifoWindow(int capacity);

  int capacity() const { return capacity_; }
  bool empty() const { return slots_.empty(); }
  bool full() const { return static_cast<int>(slots_.size()) == capacity_; }

  /// Ids the window would hold if `frame_id` were accepted as visible.
  std::vector<int> candidate(int frame_id) const;

  /// Commits `frame_id`; when `occluded` and an unoccluded frame exists, a
  /// duplicate of that frame enters instead. Returns the id that entered.
  int push(int frame_id, bool occluded);

  void reset();

  std::vector<int> ids() const;
  const std::deque<WindowSlot>& slots() const { return slots_; }
  std::optional<int> last_unoccluded() const { return last_unoccluded_; }

 private:
  int capacity_;
  std::deque<WindowSlot> slots_;
  std::optional<int> last_unoccluded_;
};

}  // namespace mptrack::runtime
