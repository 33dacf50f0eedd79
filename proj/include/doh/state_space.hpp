// Layered state storage shared by the exact DP, the FPTAS and DP-H.
//
// A state after t objects is (V_1..V_k, ln P_1..ln P_k). Each layer keeps the
// states of one step in flat arrays plus a link to the parent state, so the
// allocation behind any final state can be rebuilt by walking the links.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "doh/core.hpp"

namespace doh {

/// Free-standing DP state, used by the public pruning/trimming entry points.
struct DpState {
  std::vector<double> values;     // V_i
  std::vector<double> log_probs;  // ln P_i
  std::optional<std::pair<std::uint32_t, std::uint32_t>> parent;  // (state id, handler)

  double es() const {
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) total += values[i] * std::exp(log_probs[i]);
    return total;
  }
  friend bool operator==(const DpState&, const DpState&) = default;
};

namespace detail {

class StateLayer {
 public:
  explicit StateLayer(std::size_t k) : k_(k) {}

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return parent_.size(); }

  std::span<const double> values(std::size_t s) const {
    return std::span<const double>(values_).subspan(s * k_, k_);
  }
  std::span<const double> log_probs(std::size_t s) const {
    return std::span<const double>(log_probs_).subspan(s * k_, k_);
  }
  std::span<double> values(std::size_t s) { return std::span<double>(values_).subspan(s * k_, k_); }
  std::span<double> log_probs(std::size_t s) {
    return std::span<double>(log_probs_).subspan(s * k_, k_);
  }
  double es(std::size_t s) const { return es_[s]; }
  std::uint32_t parent(std::size_t s) const { return parent_[s]; }
  std::uint32_t handler(std::size_t s) const { return handler_[s]; }

  void reserve(std::size_t states) {
    values_.reserve(states * k_);
    log_probs_.reserve(states * k_);
    es_.reserve(states);
    parent_.reserve(states);
    handler_.reserve(states);
  }

  /// Appends a copy of `from`'s state `s` with object (value, log_p) put on `h`.
  std::size_t push_child(const StateLayer& from, std::size_t s, std::uint32_t h, double value,
                         double log_p) {
    auto v = from.values(s);
    auto lp = from.log_probs(s);
    values_.insert(values_.end(), v.begin(), v.end());
    log_probs_.insert(log_probs_.end(), lp.begin(), lp.end());
    const std::size_t idx = size();
    double& vh = values_[idx * k_ + h];
    double& lh = log_probs_[idx * k_ + h];
    const double old_es = vh * std::exp(lh);
    vh += value;
    lh += log_p;
    es_.push_back(from.es(s) - old_es + vh * std::exp(lh));
    parent_.push_back(static_cast<std::uint32_t>(s));
    handler_.push_back(h);
    return idx;
  }

  void push_root() {
    values_.insert(values_.end(), k_, 0.0);
    log_probs_.insert(log_probs_.end(), k_, 0.0);
    es_.push_back(0.0);
    parent_.push_back(0);
    handler_.push_back(0);
  }

  /// Keeps only the listed states, in the listed order.
  StateLayer select(std::span<const std::size_t> keep) const {
    StateLayer out(k_);
    out.reserve(keep.size());
    for (auto s : keep) {
      auto v = values(s);
      auto lp = log_probs(s);
      out.values_.insert(out.values_.end(), v.begin(), v.end());
      out.log_probs_.insert(out.log_probs_.end(), lp.begin(), lp.end());
      out.es_.push_back(es_[s]);
      out.parent_.push_back(parent_[s]);
      out.handler_.push_back(handler_[s]);
    }
    return out;
  }

  void recompute_es(std::size_t s) {
    double total = 0.0;
    auto v = values(s);
    auto lp = log_probs(s);
    for (std::size_t i = 0; i < k_; ++i) total += v[i] * std::exp(lp[i]);
    es_[s] = total;
  }

  DpState to_state(std::size_t s) const {
    auto v = values(s);
    auto lp = log_probs(s);
    return DpState{{v.begin(), v.end()}, {lp.begin(), lp.end()}, std::pair{parent_[s], handler_[s]}};
  }

 private:
  std::size_t k_;
  std::vector<double> values_;
  std::vector<double> log_probs_;
  std::vector<double> es_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> handler_;
};

/// Parent links of every step, enough to rebuild allocations.
class History {
 public:
  explicit History(std::size_t k) : k_(k) {}

  /// Records the links of the layer produced by step t. `perm`, when
  /// non-empty, holds k entries per state: slot i of the parent moved to
  /// slot perm[i] of the child.
  void record(const StateLayer& layer, std::vector<std::uint32_t> perm = {}) {
    std::vector<std::uint32_t> p(layer.size()), h(layer.size());
    for (std::size_t s = 0; s < layer.size(); ++s) {
      p[s] = layer.parent(s);
      h[s] = layer.handler(s);
    }
    parents_.push_back(std::move(p));
    handlers_.push_back(std::move(h));
    perms_.push_back(std::move(perm));
  }

  std::size_t steps() const noexcept { return parents_.size(); }

  /// Allocation of the final-layer state `s`; step t placed object `order[t]`.
  Allocation backtrack(std::size_t s, std::span<const std::size_t> order) const {
    const std::size_t n = steps();
    std::vector<std::size_t> chain(n + 1);
    chain[n] = s;
    for (std::size_t t = n; t > 0; --t) chain[t - 1] = parents_[t - 1][chain[t]];

    // label[c]: group currently occupying canonical slot c.
    std::vector<std::uint32_t> label(k_), next(k_);
    for (std::size_t c = 0; c < k_; ++c) label[c] = static_cast<std::uint32_t>(c);
    std::vector<std::uint32_t> group_of(order.size(), Allocation::kUnassigned);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t child = chain[t + 1];
      group_of[order[t]] = label[handlers_[t][child]];
      if (!perms_[t].empty()) {
        const std::uint32_t* perm = perms_[t].data() + child * k_;
        for (std::size_t i = 0; i < k_; ++i) next[perm[i]] = label[i];
        label.swap(next);
      }
    }
    std::vector<std::uint32_t> handler_of_group(k_);
    for (std::size_t c = 0; c < k_; ++c) handler_of_group[label[c]] = static_cast<std::uint32_t>(c);
    std::vector<std::uint32_t> out(order.size(), Allocation::kUnassigned);
    for (std::size_t j = 0; j < order.size(); ++j) {
      if (group_of[j] != Allocation::kUnassigned) out[j] = handler_of_group[group_of[j]];
    }
    return Allocation(std::move(out));
  }

 private:
  std::size_t k_;
  std::vector<std::vector<std::uint32_t>> parents_;
  std::vector<std::vector<std::uint32_t>> handlers_;
  std::vector<std::vector<std::uint32_t>> perms_;
};

/// Index of the highest-ES state; ties go to the lowest index.
inline std::size_t best_state(const StateLayer& layer) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < layer.size(); ++s) {
    if (layer.es(s) > layer.es(best)) best = s;
  }
  return best;
}

inline std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  return order;
}

/// 64-bit mixer (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hash contribution of one grid coordinate; cell hashes are sums of these so
/// a child's hash follows from its parent's in O(1).
inline std::uint64_t coordinate_hash(std::size_t dim, std::int64_t bucket) {
  return mix64((static_cast<std::uint64_t>(dim) << 32) ^ static_cast<std::uint64_t>(bucket));
}

}  // namespace detail
}  // namespace doh
