#include "ua/stream/cache.hpp"

#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua {

MotionCache::MotionCache(std::size_t capacity, double tick_ms)
    : capacity_(capacity), tick_ms_(tick_ms) {
  if (capacity == 0) throw PreconditionError("cache capacity must be positive");
  if (!(tick_ms > 0.0)) throw PreconditionError("playback tick must be positive");
}

bool MotionCache::push(std::uint64_t first_index, std::span<const WireFrame> frames) {
  std::unique_lock lock(mutex_);
  if (closed_) return false;
  if (end_index_ && first_index != *end_index_) {
    throw SequenceError(fmt::format("chunk starts at frame {}, expected {}", first_index,
                                    *end_index_));
  }
  if (!end_index_) {
    next_index_ = first_index;
    end_index_ = first_index;
  }
  std::size_t done = 0;
  while (done < frames.size()) {
    space_.wait(lock, [&] { return closed_ || buffer_.size() < capacity_; });
    if (closed_) return false;
    while (done < frames.size() && buffer_.size() < capacity_) {
      buffer_.push_back(frames[done++]);
      ++*end_index_;
    }
  }
  return true;
}

CachePop MotionCache::pop(double now_ms) {
  CachePop out;
  {
    std::lock_guard lock(mutex_);
    if (!clock_start_) clock_start_ = now_ms;
    out.play_ms = *clock_start_ + static_cast<double>(ticks_++) * tick_ms_;
    if (!buffer_.empty()) {
      last_ = buffer_.front();
      last_index_ = *next_index_;
      buffer_.pop_front();
      ++*next_index_;
      out.frame = last_;
      out.index = last_index_;
    } else {
      out.held = true;
      out.frame = last_;
      out.index = last_index_;
    }
  }
  space_.notify_one();
  return out;
}

void MotionCache::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  space_.notify_all();
}

std::size_t MotionCache::buffered() const {
  std::lock_guard lock(mutex_);
  return buffer_.size();
}

std::optional<std::uint64_t> MotionCache::cursor() const {
  std::lock_guard lock(mutex_);
  return next_index_;
}

}  // namespace ua
