#include "ua/augment/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ua/common/errors.hpp"

namespace ua {

HistoryBuffer::HistoryBuffer(std::size_t capacity, double penalty_weight)
    : capacity_(capacity), weight_(penalty_weight) {
  if (capacity == 0) throw ConfigError("history capacity must be positive");
  if (!(penalty_weight >= 0.0)) throw ConfigError("history penalty weight must be non-negative");
}

void HistoryBuffer::push(int id) {
  ids_.push_front(id);
  while (ids_.size() > capacity_) ids_.pop_back();
}

std::optional<std::size_t> HistoryBuffer::age(int id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

double HistoryBuffer::penalty(int id) const {
  const auto a = age(id);
  if (!a) return 0.0;
  return weight_ * static_cast<double>(capacity_ - *a) / static_cast<double>(capacity_);
}

bool HistoryBuffer::contains_within(int id, std::size_t window) const {
  const auto a = age(id);
  return a && *a < window;
}

int select_next(std::span<const Candidate> candidates, HistoryBuffer& history, Rng& rng,
                double temperature) {
  if (candidates.empty()) throw PreconditionError("select_next needs at least one candidate");
  if (!(temperature > 0.0)) throw PreconditionError("selection temperature must be positive");
  std::vector<double> effective(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    effective[i] = candidates[i].cost + history.penalty(candidates[i].id);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return effective[a] < effective[b]; });
  order.resize(std::min(order.size(), kTopCandidates));

  const double best = effective[order.front()];
  std::vector<double> weights;
  double total = 0.0;
  for (std::size_t i : order) {
    weights.push_back(std::exp(-(effective[i] - best) / temperature));
    total += weights.back();
  }
  double u = uniform01(rng) * total;
  std::size_t pick = order.back();
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (u < weights[k]) {
      pick = order[k];
      break;
    }
    u -= weights[k];
  }
  history.push(candidates[pick].id);
  return candidates[pick].id;
}

}  // namespace ua
