#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>

#include "ua/stream/wire.hpp"

namespace ua {

inline constexpr double kPlaybackTickMs = 20.0;

struct CachePop {
  std::optional<WireFrame> frame;  // empty only before the first delivery
  std::uint64_t index = 0;         // frame index of `frame`
  bool held = false;               // repeat of the last delivered frame
  double play_ms = 0.0;            // slot on the playback clock
};

// Frame buffer between a network producer and a fixed-rate consumer. Each
// pop consumes at most one frame; on underrun it repeats the last delivered
// frame flagged as held. One producer thread and one consumer thread.
class MotionCache {
 public:
  // Throws PreconditionError for capacity 0 or a nonpositive tick.
  explicit MotionCache(std::size_t capacity = 15000, double tick_ms = kPlaybackTickMs);

  // Appends frames starting at `first_index`. The first push fixes the base
  // index; later pushes must continue at the next index or SequenceError is
  // thrown and nothing is added. Blocks while the unplayed frames would
  // exceed capacity; returns false if the cache was closed meanwhile.
  bool push(std::uint64_t first_index, std::span<const WireFrame> frames);

  // Consumes the next buffered frame, or repeats the last one on underrun.
  // The playback clock starts at the first call and advances one tick per
  // call, independent of `now_ms` arrival jitter.
  CachePop pop(double now_ms);

  // Wakes a blocked producer; later pushes return false.
  void close();

  std::size_t buffered() const;
  // Index the next pop will deliver.
  std::optional<std::uint64_t> cursor() const;
  double tick_ms() const { return tick_ms_; }

 private:
  std::size_t capacity_;
  double tick_ms_;
  mutable std::mutex mutex_;
  std::condition_variable space_;
  std::deque<WireFrame> buffer_;
  std::optional<std::uint64_t> next_index_;  // cursor
  std::optional<std::uint64_t> end_index_;   // last buffered index + 1
  std::optional<WireFrame> last_;
  std::uint64_t last_index_ = 0;
  std::optional<double> clock_start_;
  std::uint64_t ticks_ = 0;
  bool closed_ = false;
};

}  // namespace ua
