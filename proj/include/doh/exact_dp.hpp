// Exact dynamic program over (V_1..V_k, P_1..P_k) states, one object per step.
//
// The plain program keeps every reachable state. Two reductions are on by
// default and never change the optimum:
//  - dominance pruning: a state no better than another in every V_i and P_i
//    coordinate cannot extend to a better allocation, so it is dropped;
//  - symmetry merging: handlers with identical probability rows are
//    interchangeable, so their coordinates are stored sorted by V.
#pragma once

#include <algorithm>
#include <numeric>

#include "doh/core.hpp"
#include "doh/oracle.hpp"
#include "doh/state_space.hpp"

namespace doh {

struct DpOptions {
  bool prune = true;
  bool merge_symmetric = true;
  std::size_t state_cap = 10'000'000;
};

namespace detail {

/// Indices of the states that survive dominance pruning, in ascending id
/// order. `coords(s)` yields the 2k coordinates of state s (V's then ln P's).
/// Exact duplicates keep the lowest id.
template <class Coords>
std::vector<std::size_t> undominated(std::size_t count, std::size_t dims, Coords&& coords) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ca = coords(a);
    auto cb = coords(b);
    for (std::size_t d = 0; d < dims; ++d) {
      if (ca[d] != cb[d]) return ca[d] > cb[d];
    }
    return a < b;
  });
  // Any dominator of s precedes s in this order, and a dropped dominator is
  // itself dominated by a kept state, so checking kept states suffices.
  std::vector<std::size_t> kept;
  for (std::size_t s : order) {
    auto cs = coords(s);
    bool dominated = false;
    for (std::size_t t : kept) {
      auto ct = coords(t);
      bool all_ge = true;
      for (std::size_t d = 0; d < dims && all_ge; ++d) all_ge = ct[d] >= cs[d];
      if (all_ge) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Groups of handlers with identical probability rows (only groups of size > 1).
inline std::vector<std::vector<std::uint32_t>> symmetric_groups(const Instance& inst) {
  std::vector<bool> taken(inst.k(), false);
  std::vector<std::vector<std::uint32_t>> groups;
  for (std::size_t a = 0; a < inst.k(); ++a) {
    if (taken[a]) continue;
    std::vector<std::uint32_t> g{static_cast<std::uint32_t>(a)};
    auto ra = inst.row(a);
    for (std::size_t b = a + 1; b < inst.k(); ++b) {
      if (!taken[b] && std::equal(ra.begin(), ra.end(), inst.row(b).begin())) {
        g.push_back(static_cast<std::uint32_t>(b));
        taken[b] = true;
      }
    }
    if (g.size() > 1) groups.push_back(std::move(g));
  }
  return groups;
}

/// Sorts the coordinates of each symmetric group by (V, ln P) descending and
/// writes the applied slot permutation to `perm` (k entries).
inline void canonicalize(StateLayer& layer, std::size_t s,
                         const std::vector<std::vector<std::uint32_t>>& groups,
                         std::span<std::uint32_t> perm) {
  auto v = layer.values(s);
  auto lp = layer.log_probs(s);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<std::uint32_t>(i);
  std::vector<std::uint32_t> slots;
  std::vector<double> nv, nlp;
  for (const auto& g : groups) {
    slots.assign(g.begin(), g.end());
    std::stable_sort(slots.begin(), slots.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (v[a] != v[b]) return v[a] > v[b];
      return lp[a] > lp[b];
    });
    nv.resize(g.size());
    nlp.resize(g.size());
    for (std::size_t r = 0; r < g.size(); ++r) {
      nv[r] = v[slots[r]];
      nlp[r] = lp[slots[r]];
      perm[slots[r]] = g[r];
    }
    for (std::size_t r = 0; r < g.size(); ++r) {
      v[g[r]] = nv[r];
      lp[g[r]] = nlp[r];
    }
  }
}

}  // namespace detail

/// Removes every state dominated by another (<= in every V_i and P_i, strict
/// in one); of exact duplicates only the first is kept. Order is preserved.
inline std::vector<DpState> prune_dominated(std::vector<DpState> states) {
  if (states.empty()) return states;
  const std::size_t k = states.front().values.size();
  std::vector<double> flat(states.size() * 2 * k);
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (states[s].values.size() != k || states[s].log_probs.size() != k) {
      throw ValidationError("prune_dominated: states must share one handler count");
    }
    std::copy(states[s].values.begin(), states[s].values.end(), flat.begin() + s * 2 * k);
    std::copy(states[s].log_probs.begin(), states[s].log_probs.end(),
              flat.begin() + s * 2 * k + k);
  }
  auto kept = detail::undominated(states.size(), 2 * k, [&](std::size_t s) {
    return std::span<const double>(flat).subspan(s * 2 * k, 2 * k);
  });
  std::vector<DpState> out;
  out.reserve(kept.size());
  for (auto s : kept) out.push_back(std::move(states[s]));
  return out;
}

/// Exact optimum by the layered state-space DP.
inline SolveReport dp_exact(const Instance& inst, const DpOptions& opt = {}) {
  Stopwatch clock;
  const std::size_t k = inst.k();
  const auto groups = opt.merge_symmetric ? detail::symmetric_groups(inst)
                                          : std::vector<std::vector<std::uint32_t>>{};
  detail::History history(k);
  detail::StateLayer layer(k);
  layer.push_root();
  std::size_t peak = 1;
  std::uint64_t generated = 0;
  std::vector<double> coords;

  for (std::size_t j = 0; j < inst.n(); ++j) {
    const std::size_t candidates = layer.size() * k;
    if (candidates > opt.state_cap) {
      throw SizeError("exact DP would hold " + std::to_string(candidates) +
                      " states, cap is " + std::to_string(opt.state_cap));
    }
    generated += candidates;
    detail::StateLayer next(k);
    next.reserve(candidates);
    for (std::size_t s = 0; s < layer.size(); ++s) {
      for (std::uint32_t h = 0; h < k; ++h) next.push_child(layer, s, h, inst.value(j), inst.log_prob(h, j));
    }
    std::vector<std::uint32_t> perm;
    if (!groups.empty()) {
      perm.resize(next.size() * k);
      for (std::size_t s = 0; s < next.size(); ++s) {
        detail::canonicalize(next, s, groups, std::span<std::uint32_t>(perm).subspan(s * k, k));
      }
    }
    if (opt.prune) {
      coords.resize(next.size() * 2 * k);
      for (std::size_t s = 0; s < next.size(); ++s) {
        auto v = next.values(s);
        auto lp = next.log_probs(s);
        std::copy(v.begin(), v.end(), coords.begin() + s * 2 * k);
        std::copy(lp.begin(), lp.end(), coords.begin() + s * 2 * k + k);
      }
      auto kept = detail::undominated(next.size(), 2 * k, [&](std::size_t s) {
        return std::span<const double>(coords).subspan(s * 2 * k, 2 * k);
      });
      if (!perm.empty()) {
        std::vector<std::uint32_t> kept_perm(kept.size() * k);
        for (std::size_t r = 0; r < kept.size(); ++r) {
          std::copy_n(perm.begin() + kept[r] * k, k, kept_perm.begin() + r * k);
        }
        perm.swap(kept_perm);
      }
      next = next.select(kept);
    }
    history.record(next, std::move(perm));
    peak = std::max(peak, next.size());
    layer = std::move(next);
  }

  for (std::size_t s = 0; s < layer.size(); ++s) layer.recompute_es(s);
  const auto best = detail::best_state(layer);
  auto alloc = history.backtrack(best, detail::identity_order(inst.n()));
  return make_report(inst, std::move(alloc), "dp-exact", clock,
                     {{"peak_states", std::to_string(peak)},
                      {"states_explored", std::to_string(generated)},
                      {"prune", opt.prune ? "true" : "false"},
                      {"symmetry_groups", std::to_string(groups.size())}});
}

}  // namespace doh
