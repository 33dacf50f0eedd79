// (1 - eps)-approximation for a constant number of handlers by trimming the
// exact DP's state space to one state per geometric orthotope, and the
// (1 - eps)(c - 1)/k approximation that runs it on every c-subset of handlers.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "doh/core.hpp"
#include "doh/state_space.hpp"

namespace doh {

/// Geometric grid used by the trimming step. Values are normalized so that
/// they sum to 1; bucket r of a coordinate x in (0, 1] is the r with
/// x in [delta^-(r+1), delta^-r).
struct TrimConfig {
  static constexpr std::int64_t kZeroBucket = -1;  // V_i = 0 (empty handler)

  double epsilon = 0.0;
  double delta = 1.0;
  double ln_delta = 0.0;
  std::int64_t l_v = 0;  // floor(|ln V_min| / ln delta)
  std::int64_t l_p = 0;  // floor(|ln P_min| / ln delta)
  double scale = 1.0;    // sum of the original values

  static TrimConfig make(const Instance& inst, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw ValidationError("epsilon: must lie in (0, 1)");
    }
    TrimConfig c;
    c.epsilon = epsilon;
    c.delta = 1.0 + epsilon / (4.0 * static_cast<double>(inst.k()) * static_cast<double>(inst.n()));
    c.ln_delta = std::log1p(epsilon / (4.0 * static_cast<double>(inst.k()) * static_cast<double>(inst.n())));
    c.scale = inst.total_value();
    const auto vals = inst.values();
    const double v_min = *std::min_element(vals.begin(), vals.end()) / c.scale;
    double log_p_min = 0.0;
    for (std::size_t i = 0; i < inst.k(); ++i) {
      double row_log = 0.0;
      for (double lp : inst.log_row(i)) row_log += lp;
      log_p_min = std::min(log_p_min, row_log);
    }
    c.l_v = static_cast<std::int64_t>(std::floor(-std::log(v_min) / c.ln_delta));
    c.l_p = static_cast<std::int64_t>(std::floor(-log_p_min / c.ln_delta));
    return c;
  }

  /// Bucket of a normalized value; l_v + 1 is the rounding-underflow bucket.
  std::int64_t value_bucket(double v) const {
    if (v <= 0.0) return kZeroBucket;
    return clamp_bucket(-std::log(v), l_v);
  }

  /// Bucket of a survival probability given as ln P.
  std::int64_t prob_bucket(double log_p) const { return clamp_bucket(-log_p, l_p); }

  /// Upper bound on distinct orthotopes: (L_v + 2)^k (L_p + 2)^k.
  double orthotope_bound(std::size_t k) const {
    return std::pow(static_cast<double>(l_v + 2), static_cast<double>(k)) *
           std::pow(static_cast<double>(l_p + 2), static_cast<double>(k));
  }

 private:
  std::int64_t clamp_bucket(double magnitude, std::int64_t limit) const {
    if (magnitude <= 0.0) return 0;
    const auto r = static_cast<std::int64_t>(std::floor(magnitude / ln_delta));
    return r > limit ? limit + 1 : r;
  }
};

struct OrthotopeKey {
  std::vector<std::int64_t> r;  // value buckets
  std::vector<std::int64_t> s;  // probability buckets
  friend bool operator==(const OrthotopeKey&, const OrthotopeKey&) = default;
};

/// Orthotope of a state whose values are already normalized.
inline OrthotopeKey orthotope_of(const DpState& state, const TrimConfig& cfg) {
  OrthotopeKey key;
  for (double v : state.values) key.r.push_back(cfg.value_bucket(v));
  for (double lp : state.log_probs) key.s.push_back(cfg.prob_bucket(lp));
  return key;
}

/// Keeps the first state to arrive in each occupied orthotope, preserving
/// arrival order. Values must be normalized.
inline std::vector<DpState> trim_orthotope(std::vector<DpState> states, const TrimConfig& cfg) {
  std::vector<OrthotopeKey> seen;
  std::unordered_multimap<std::uint64_t, std::size_t> index;
  std::vector<DpState> out;
  for (auto& st : states) {
    auto key = orthotope_of(st, cfg);
    std::uint64_t h = 0;
    for (std::size_t i = 0; i < key.r.size(); ++i) {
      h += detail::coordinate_hash(i, key.r[i]) + detail::coordinate_hash(key.r.size() + i, key.s[i]);
    }
    bool occupied = false;
    auto [lo, hi] = index.equal_range(h);
    for (auto it = lo; it != hi && !occupied; ++it) occupied = seen[it->second] == key;
    if (occupied) continue;
    index.emplace(h, seen.size());
    seen.push_back(std::move(key));
    out.push_back(std::move(st));
  }
  return out;
}

struct FptasOptions {
  std::size_t state_cap = 10'000'000;
};

namespace detail {

/// Trimmed layer: states plus their orthotope coordinates.
struct KeyedLayer {
  StateLayer states;
  std::vector<std::int64_t> keys;  // 2k per state: r_1..r_k, s_1..s_k
  std::vector<std::uint64_t> hashes;
  explicit KeyedLayer(std::size_t k) : states(k) {}
};

struct Candidate {
  std::uint32_t parent;
  std::uint32_t handler;
  std::int64_t r;
  std::int64_t s;
};

}  // namespace detail

/// FPTAS for constant k: the exact DP with first-arrival orthotope trimming.
/// The returned allocation has ES >= (1 - epsilon) * OPT.
inline SolveReport fptas(const Instance& inst, double epsilon, const FptasOptions& opt = {}) {
  Stopwatch clock;
  const auto cfg = TrimConfig::make(inst, epsilon);
  const std::size_t k = inst.k();

  detail::KeyedLayer layer(k);
  layer.states.push_root();
  layer.keys.assign(2 * k, 0);
  for (std::size_t i = 0; i < k; ++i) layer.keys[i] = TrimConfig::kZeroBucket;
  layer.hashes.push_back(0);
  for (std::size_t d = 0; d < 2 * k; ++d) layer.hashes[0] += detail::coordinate_hash(d, layer.keys[d]);

  detail::History history(k);
  std::size_t peak = 1;
  std::uint64_t orthotopes = 0;
  std::vector<detail::Candidate> kept;
  std::unordered_multimap<std::uint64_t, std::uint32_t> cells;

  auto key_at = [&](const detail::Candidate& c, std::size_t d) {
    if (d == c.handler) return c.r;
    if (d == k + c.handler) return c.s;
    return layer.keys[c.parent * 2 * k + d];
  };

  for (std::size_t j = 0; j < inst.n(); ++j) {
    if (layer.states.size() * k > opt.state_cap) {
      throw SizeError("FPTAS would generate " + std::to_string(layer.states.size() * k) +
                      " states, cap is " + std::to_string(opt.state_cap));
    }
    const double v = inst.value(j) / cfg.scale;
    kept.clear();
    cells.clear();
    std::vector<std::uint64_t> kept_hash;
    for (std::uint32_t s = 0; s < layer.states.size(); ++s) {
      auto vals = layer.states.values(s);
      auto lps = layer.states.log_probs(s);
      const std::int64_t* pk = layer.keys.data() + s * 2 * k;
      for (std::uint32_t h = 0; h < k; ++h) {
        detail::Candidate c{s, h, cfg.value_bucket(vals[h] + v),
                            cfg.prob_bucket(lps[h] + inst.log_prob(h, j))};
        const std::uint64_t hash = layer.hashes[s] - detail::coordinate_hash(h, pk[h]) -
                                   detail::coordinate_hash(k + h, pk[k + h]) +
                                   detail::coordinate_hash(h, c.r) +
                                   detail::coordinate_hash(k + h, c.s);
        bool occupied = false;
        auto [lo, hi] = cells.equal_range(hash);
        for (auto it = lo; it != hi && !occupied; ++it) {
          const auto& other = kept[it->second];
          bool same = true;
          for (std::size_t d = 0; d < 2 * k && same; ++d) same = key_at(other, d) == key_at(c, d);
          occupied = same;
        }
        if (occupied) continue;
        cells.emplace(hash, static_cast<std::uint32_t>(kept.size()));
        kept.push_back(c);
        kept_hash.push_back(hash);
      }
    }
    orthotopes += kept.size();

    detail::KeyedLayer next(k);
    next.states.reserve(kept.size());
    next.keys.reserve(kept.size() * 2 * k);
    for (std::size_t idx = 0; idx < kept.size(); ++idx) {
      const auto& c = kept[idx];
      next.states.push_child(layer.states, c.parent, c.handler, v, inst.log_prob(c.handler, j));
      for (std::size_t d = 0; d < 2 * k; ++d) next.keys.push_back(key_at(c, d));
    }
    next.hashes = std::move(kept_hash);
    history.record(next.states);
    peak = std::max(peak, next.states.size());
    layer = std::move(next);
  }

  for (std::size_t s = 0; s < layer.states.size(); ++s) layer.states.recompute_es(s);
  const auto best = detail::best_state(layer.states);
  auto alloc = history.backtrack(best, detail::identity_order(inst.n()));
  return make_report(inst, std::move(alloc), "fptas", clock,
                     {{"epsilon", format_number(epsilon)},
                      {"delta", format_number(cfg.delta)},
                      {"l_v", std::to_string(cfg.l_v)},
                      {"l_p", std::to_string(cfg.l_p)},
                      {"value_scale", format_number(cfg.scale)},
                      {"orthotopes", std::to_string(orthotopes)},
                      {"peak_states", std::to_string(peak)}});
}

/// Best FPTAS result over all c-subsets of handlers (lexicographic subset
/// order, first wins ties). ES >= (1 - eps)(c - 1)/k * OPT.
inline SolveReport subset_approx(const Instance& inst, std::size_t c, double epsilon,
                                 const FptasOptions& opt = {}) {
  Stopwatch clock;
  if (c < 2 || c > inst.k()) {
    throw ValidationError("subset-c: must satisfy 2 <= c <= k (k = " + std::to_string(inst.k()) + ")");
  }
  std::vector<std::size_t> subset(c);
  std::iota(subset.begin(), subset.end(), std::size_t{0});
  std::optional<SolveReport> best;
  std::vector<std::size_t> best_subset;
  std::size_t tried = 0;
  while (true) {
    ++tried;
    auto sub = inst.restrict_handlers(subset);
    auto r = fptas(sub, epsilon, opt);
    if (!best || r.es > best->es) {
      std::vector<std::uint32_t> mapped(inst.n());
      for (std::size_t j = 0; j < inst.n(); ++j) {
        mapped[j] = static_cast<std::uint32_t>(subset[r.allocation[j]]);
      }
      r.allocation = Allocation(std::move(mapped));
      best = std::move(r);
      best_subset = subset;
    }
    // next combination in lexicographic order
    std::size_t i = c;
    while (i > 0 && subset[i - 1] == inst.k() - c + (i - 1)) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t t = i; t < c; ++t) subset[t] = subset[t - 1] + 1;
  }
  std::string subset_str;
  for (auto h : best_subset) subset_str += (subset_str.empty() ? "" : ",") + std::to_string(h + 1);
  Meta meta = best->meta;
  meta["c"] = std::to_string(c);
  meta["subsets"] = std::to_string(tried);
  meta["best_subset"] = subset_str;
  return make_report(inst, std::move(best->allocation), "subset-approx", clock, std::move(meta));
}

}  // namespace doh
