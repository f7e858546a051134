#include "mia/core/replay_buffer.hpp"

#include "mia/core/errors.hpp"

namespace mia {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw DomainError("replay buffer capacity must be positive");
  slots_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::insert(const Trajectory& trajectory) {
  for (const auto& t : trajectory.transitions()) insert(t);
}

void ReplayBuffer::insert(const Transition& transition) {
  if (size_ < capacity_) {
    // Before the first wrap the oldest tuple sits in slot 0.
    slots_.push_back(transition);
    ++size_;
    return;
  }
  slots_[head_] = transition;
  head_ = (head_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n) {
  if (size_ == 0) throw StateError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng_);
  draws_ += n;
  return out;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n) {
  const auto idx = sample_indices(n);
  std::vector<Transition> out;
  out.reserve(n);
  for (auto i : idx) out.push_back(at(i));
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer index out of range");
  return slots_[(head_ + i) % slots_.size()];
}

}  // namespace mia
