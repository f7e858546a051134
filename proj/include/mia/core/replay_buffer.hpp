#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "mia/core/types.hpp"

namespace mia {

// Flat tuple store. Trajectories are broken into their transitions on insert;
// sampling is uniform with replacement, so no ordering survives the sampling
// interface. Oldest tuples are evicted first once capacity is reached.
//
// Single writer. Concurrent readers are fine between writes, but sample()
// advances the internal generator and counts as a write.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void insert(const Trajectory& trajectory);
  void insert(const Transition& transition);

  // n independent uniform draws. Throws StateError on an empty buffer.
  std::vector<Transition> sample(std::size_t n);
  std::vector<std::size_t> sample_indices(std::size_t n);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }

  // i-th stored tuple in insertion order among those still held (0 = oldest).
  const Transition& at(std::size_t i) const;

  // Total tuples handed out by sample()/sample_indices() since construction.
  std::uint64_t draws() const { return draws_; }

 private:
  std::size_t capacity_;
  std::vector<Transition> slots_;
  std::size_t head_ = 0;  // slot of the oldest tuple
  std::size_t size_ = 0;
  std::mt19937_64 rng_;
  std::uint64_t draws_ = 0;
};

}  // namespace mia
