// Exhaustive enumeration of all k^n total allocations. Deliberately plain:
// every other solver is checked against it.
#pragma once

#include <cstdint>
#include <string>

#include "doh/core.hpp"

namespace doh {

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// k^n, saturating at UINT64_MAX.
inline std::uint64_t assignment_count(std::size_t n, std::size_t k) {
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < n; ++j) {
    if (total > std::numeric_limits<std::uint64_t>::max() / k) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= k;
  }
  return total;
}

inline void check_enumeration_cap(const Instance& inst, std::uint64_t cap) {
  const auto count = assignment_count(inst.n(), inst.k());
  if (count > cap) {
    throw SizeError("enumeration needs k^n = " + std::to_string(inst.k()) + "^" +
                    std::to_string(inst.n()) + " evaluations, cap is " + std::to_string(cap));
  }
}

/// Single-pass stream of (allocation, ES) pairs in lexicographic order of the
/// assignment sequence (object 1 most significant).
class AllocationStream {
 public:
  explicit AllocationStream(const Instance& inst, std::uint64_t cap = kDefaultEnumerationCap)
      : inst_(&inst), current_(inst.n(), 0u) {
    check_enumeration_cap(inst, cap);
  }

  /// Advances to the next allocation; false once all k^n were produced.
  bool next() {
    if (!started_) {
      started_ = true;
    } else {
      std::size_t j = inst_->n();
      while (j > 0) {
        --j;
        if (current_[j] + 1 < inst_->k()) {
          ++current_[j];
          break;
        }
        current_[j] = 0;
        if (j == 0) return false;
      }
    }
    es_ = detail::accumulate(*inst_, current_.handlers(), scratch_);
    return true;
  }

  const Allocation& allocation() const noexcept { return current_; }
  double es() const noexcept { return es_; }

 private:
  const Instance* inst_;
  Allocation current_;
  detail::EvalScratch scratch_;
  double es_ = 0.0;
  bool started_ = false;
};

/// Calls `fn(const Allocation&, double es)` for every total allocation.
template <class Fn>
void enumerate_reports(const Instance& inst, Fn&& fn, std::uint64_t cap = kDefaultEnumerationCap) {
  AllocationStream stream(inst, cap);
  while (stream.next()) fn(stream.allocation(), stream.es());
}

/// Exact optimum; ties go to the lexicographically smallest assignment.
inline SolveReport brute_force(const Instance& inst, std::uint64_t cap = kDefaultEnumerationCap) {
  Stopwatch clock;
  AllocationStream stream(inst, cap);
  Allocation best;
  double best_es = -1.0;
  std::uint64_t evaluated = 0;
  while (stream.next()) {
    ++evaluated;
    if (stream.es() > best_es) {
      best_es = stream.es();
      best = stream.allocation();
    }
  }
  return make_report(inst, std::move(best), "brute-force", clock,
                     {{"evaluations", std::to_string(evaluated)}});
}

}  // namespace doh
