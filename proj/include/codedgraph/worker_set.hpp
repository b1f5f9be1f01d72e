#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace codedgraph {

using WorkerId = std::uint32_t;  // 1-based
inline constexpr WorkerId kMaxWorkers = 32;

/// Set of workers as a bitmask; worker k occupies bit k-1.
class WorkerSet {
 public:
  constexpr WorkerSet() = default;
  constexpr explicit WorkerSet(std::uint32_t bits) : bits_(bits) {}
  WorkerSet(std::initializer_list<WorkerId> ids) {
    for (WorkerId k : ids) insert(k);
  }

  static WorkerSet range(WorkerId first, WorkerId last) {
    WorkerSet s;
    for (WorkerId k = first; k <= last; ++k) s.insert(k);
    return s;
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(WorkerId k) const { return k >= 1 && k <= kMaxWorkers && (bits_ >> (k - 1)) & 1u; }

  void insert(WorkerId k) {
    if (k < 1 || k > kMaxWorkers) throw ParameterError("worker id out of range: " + std::to_string(k));
    bits_ |= 1u << (k - 1);
  }
  constexpr WorkerSet with(WorkerId k) const { return WorkerSet(bits_ | (1u << (k - 1))); }
  constexpr WorkerSet without(WorkerId k) const { return WorkerSet(bits_ & ~(1u << (k - 1))); }
  constexpr bool subset_of(WorkerSet other) const { return (bits_ & ~other.bits_) == 0; }

  /// Members in ascending order.
  std::vector<WorkerId> members() const {
    std::vector<WorkerId> out;
    for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(static_cast<WorkerId>(std::countr_zero(b)) + 1);
    return out;
  }

  /// Zero-based position of k among the members in ascending order.
  std::size_t rank_of(WorkerId k) const {
    if (!contains(k)) throw UsageError("worker " + std::to_string(k) + " not in set");
    const std::uint32_t below = bits_ & ((1u << (k - 1)) - 1u);
    return static_cast<std::size_t>(std::popcount(below));
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (WorkerId k : members()) {
      if (!first) s += ",";
      s += std::to_string(k);
      first = false;
    }
    return s + "}";
  }

  friend constexpr bool operator==(WorkerSet a, WorkerSet b) = default;
  friend constexpr auto operator<=>(WorkerSet a, WorkerSet b) = default;

 private:
  std::uint32_t bits_ = 0;
};

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

/// All size-`size` subsets of `universe`, lexicographic in their ascending member lists.
inline std::vector<WorkerSet> subsets_of_size(const std::vector<WorkerId>& universe, std::size_t size) {
  std::vector<WorkerSet> out;
  if (size > universe.size()) return out;
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  while (true) {
    WorkerSet s;
    for (std::size_t i : idx) s.insert(universe[i]);
    out.push_back(s);
    std::size_t i = size;
    while (i > 0 && idx[i - 1] == universe.size() - size + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

inline std::vector<WorkerSet> subsets_of_size(WorkerId workers, std::size_t size) {
  std::vector<WorkerId> universe(workers);
  for (WorkerId k = 0; k < workers; ++k) universe[k] = k + 1;
  return subsets_of_size(universe, size);
}

}  // namespace codedgraph
