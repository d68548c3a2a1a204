#pragma once

#include <deque>
#include <optional>
#include <span>

#include "ua/common/rng.hpp"

namespace ua {

struct Candidate {
  int id = 0;
  double cost = 0.0;
};

// Recently chosen clip ids, most recent first (age 0). Ids older than
// `capacity` selections are evicted.
class HistoryBuffer {
 public:
  // Throws ConfigError on zero capacity or a negative penalty weight.
  explicit HistoryBuffer(std::size_t capacity = 16, double penalty_weight = 1.0);

  void push(int id);
  std::optional<std::size_t> age(int id) const;
  // weight * (capacity - age) / capacity for ids in the buffer, else 0.
  double penalty(int id) const;
  bool contains_within(int id, std::size_t window) const;
  std::size_t size() const { return ids_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  double weight_;
  std::deque<int> ids_;
};

inline constexpr std::size_t kTopCandidates = 5;

// Adds the history penalty to each cost, keeps the five lowest (ties by
// position in `candidates`), samples one with probability proportional to
// exp(-(cost - best) / temperature) and pushes it onto `history`.
// Throws PreconditionError on an empty list or non-positive temperature.
int select_next(std::span<const Candidate> candidates, HistoryBuffer& history, Rng& rng,
                double temperature = 1.0);

}  // namespace ua
