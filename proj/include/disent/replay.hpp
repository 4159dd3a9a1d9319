// Copyright 2026 The disent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DISENT_REPLAY_HPP
#define DISENT_REPLAY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "disent/rng.hpp"

namespace disent {

/// Binary sum tree over leaf priorities, supporting O(log n) point updates
/// and prefix-mass lookups.
class SumTree {
 public:
  explicit SumTree(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("SumTree: capacity must be positive");
    leaves_ = 1;
    while (leaves_ < capacity) leaves_ *= 2;
    tree_.assign(2 * leaves_, 0.0);
  }

  int capacity() const { return capacity_; }

  double total() const { return tree_[1]; }

  double get(int i) const {
    check_index(i);
    return tree_[leaves_ + i];
  }

  void set(int i, double value) {
    check_index(i);
    if (!(value >= 0.0) || !std::isfinite(value)) throw std::invalid_argument("SumTree::set: value must be finite and non-negative");
    int node = leaves_ + i;
    tree_[node] = value;
    for (node /= 2; node >= 1; node /= 2) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
  }

  /// Leaf whose cumulative-priority interval contains `mass`.
  int find(double mass) const {
    if (total() <= 0.0) throw std::runtime_error("SumTree::find: tree is empty");
    if (mass < 0.0) mass = 0.0;
    int node = 1;
    while (node < leaves_) {
      double left = tree_[2 * node];
      if (mass < left) {
        node = 2 * node;
      } else {
        mass -= left;
        node = 2 * node + 1;
      }
    }
    int leaf = node - leaves_;
    return leaf < capacity_ ? leaf : capacity_ - 1;
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= capacity_) throw std::invalid_argument("SumTree: index out of range");
  }

  int capacity_;
  int leaves_;
  std::vector<double> tree_;
};

/// One stored step of circuit building. The successor state is implicit: the
/// episode appends `action` to `prefix`, so only the prefix is kept.
struct StoredTransition {
  std::vector<std::uint8_t> prefix;
  std::uint8_t action = 0;
  double reward = 0.0;
  bool done = false;
};

/// Ring-buffer replay memory with proportional prioritized sampling:
/// P(i) proportional to (|td_error| + epsilon)^alpha, importance weights
/// (N P(i))^-beta normalized by the batch maximum. Fresh transitions enter
/// at the running maximum priority so each is seen at least once.
class ReplayBuffer {
 public:
  ReplayBuffer(int capacity, double alpha, double epsilon)
      : capacity_(capacity), alpha_(alpha), epsilon_(epsilon), tree_(capacity) {
    if (capacity < 1) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    if (alpha < 0.0 || !std::isfinite(alpha)) throw std::invalid_argument("ReplayBuffer: alpha must be non-negative");
    if (epsilon <= 0.0) throw std::invalid_argument("ReplayBuffer: epsilon must be positive");
    data_.reserve(static_cast<std::size_t>(capacity));
  }

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(data_.size()); }

  const StoredTransition& transition(int i) const {
    if (i < 0 || i >= size()) throw std::invalid_argument("ReplayBuffer::transition: index out of range");
    return data_[static_cast<std::size_t>(i)];
  }

  double priority(int i) const { return tree_.get(i); }
  double total_priority() const { return tree_.total(); }

  void insert(StoredTransition t) {
    int slot;
    if (size() < capacity_) {
      slot = size();
      data_.push_back(std::move(t));
    } else {
      slot = head_;
      data_[static_cast<std::size_t>(slot)] = std::move(t);
    }
    head_ = (slot + 1) % capacity_;
    tree_.set(slot, max_priority_);
  }

  struct Sample {
    std::vector<int> indices;
    Eigen::VectorXd weights;
  };

  /// Stratified draw of k transitions. Requires at least k stored entries.
  Sample sample(int k, double beta, Rng& rng) const {
    if (k < 1) throw std::invalid_argument("ReplayBuffer::sample: k must be positive");
    if (size() < k)
      throw std::invalid_argument("ReplayBuffer::sample: buffer holds " + std::to_string(size()) +
                                  " transitions, need " + std::to_string(k));
    if (beta < 0.0 || !std::isfinite(beta)) throw std::invalid_argument("ReplayBuffer::sample: beta must be non-negative");

    Sample s;
    s.indices.resize(k);
    s.weights.resize(k);
    const double total = tree_.total();
    const double segment = total / k;
    for (int i = 0; i < k; ++i) {
      double mass = (i + rng.uniform()) * segment;
      int idx = tree_.find(std::min(mass, total * (1.0 - 1e-12)));
      s.indices[i] = idx;
      double prob = tree_.get(idx) / total;
      s.weights[i] = std::pow(static_cast<double>(size()) * prob, -beta);
    }
    s.weights /= s.weights.maxCoeff();
    return s;
  }

  /// Re-prioritizes the sampled transitions from their TD errors.
  void update_priorities(std::span<const int> indices, std::span<const double> td_errors) {
    if (indices.size() != td_errors.size())
      throw std::invalid_argument("ReplayBuffer::update_priorities: length mismatch");
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] < 0 || indices[i] >= size())
        throw std::invalid_argument("ReplayBuffer::update_priorities: index out of range");
      double delta = td_errors[i];
      if (!std::isfinite(delta)) throw std::invalid_argument("ReplayBuffer::update_priorities: non-finite TD error");
      double p = std::pow(std::abs(delta) + epsilon_, alpha_);
      tree_.set(indices[i], p);
      if (p > max_priority_) max_priority_ = p;
    }
  }

 private:
  int capacity_;
  double alpha_;
  double epsilon_;
  double max_priority_ = 1.0;
  int head_ = 0;
  std::vector<StoredTransition> data_;
  SumTree tree_;
};

}  // namespace disent

#endif
