// Scalable heuristics: the MMR greedy family, the grid-trimmed DP (DP-H) and
// the two genetic algorithms (RI-GA, HI-GA).
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "doh/core.hpp"
#include "doh/state_space.hpp"

namespace doh {

enum class MmrVariant { Plain, Ordered, Clairvoyant };

inline std::string_view to_string(MmrVariant v) {
  switch (v) {
    case MmrVariant::Plain: return "mmr";
    case MmrVariant::Ordered: return "o-mmr";
    case MmrVariant::Clairvoyant: return "c-mmr";
  }
  return "mmr";
}

namespace detail {

/// Running (V_i, P_i) per handler with the same direct/log-space switch as
/// evaluate(), so deltas agree with the final recomputed ES.
class Loads {
 public:
  explicit Loads(std::size_t k) : value_(k, 0.0), direct_(k, 1.0), log_(k, 0.0), count_(k, 0) {}

  double es(std::size_t h) const {
    return value_[h] * survival_prob(direct_[h], log_[h], count_[h]);
  }

  /// ES change from adding `m` objects with total value `v`, product `p`
  /// and log-product `lp` to handler h.
  double delta(std::size_t h, double v, double p, double lp, std::size_t m = 1) const {
    const double after = (value_[h] + v) * survival_prob(direct_[h] * p, log_[h] + lp, count_[h] + m);
    return after - es(h);
  }

  void add(std::size_t h, double v, double p, double lp, std::size_t m = 1) {
    value_[h] += v;
    direct_[h] *= p;
    log_[h] += lp;
    count_[h] += m;
  }

 private:
  std::vector<double> value_, direct_, log_;
  std::vector<std::size_t> count_;
};

inline std::vector<std::size_t> value_order(const Instance& inst) {
  std::vector<std::size_t> order(inst.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return inst.value(a) > inst.value(b); });
  return order;
}

}  // namespace detail

/// Greedy maximum marginal return. meta["step_trace"] lists "j:h" per step
/// (1-based; h = 0 marks the C-MMR dumpster).
inline SolveReport mmr(const Instance& inst, MmrVariant variant = MmrVariant::Plain) {
  Stopwatch clock;
  const std::size_t n = inst.n(), k = inst.k();
  const auto order = variant == MmrVariant::Plain ? detail::identity_order(n) : detail::value_order(inst);
  detail::Loads loads(k);
  std::vector<std::uint32_t> a(n, Allocation::kUnassigned);
  std::vector<std::size_t> dumpster;
  std::string trace;
  for (std::size_t j : order) {
    std::size_t best = 0;
    double best_delta = -std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < k; ++h) {
      const double d = loads.delta(h, inst.value(j), inst.prob(h, j), inst.log_prob(h, j));
      if (d > best_delta) {
        best_delta = d;
        best = h;
      }
    }
    std::size_t label = best + 1;
    if (variant == MmrVariant::Clairvoyant && best_delta < 0.0) {
      dumpster.push_back(j);
      label = 0;
    } else {
      loads.add(best, inst.value(j), inst.prob(best, j), inst.log_prob(best, j));
      a[j] = static_cast<std::uint32_t>(best);
    }
    if (!trace.empty()) trace += ',';
    trace += std::to_string(j + 1) + ':' + std::to_string(label);
  }
  Meta meta{{"step_trace", trace}};
  if (variant == MmrVariant::Clairvoyant) {
    meta["dumpster_size"] = std::to_string(dumpster.size());
    if (!dumpster.empty()) {
      std::size_t target = 0;
      double target_delta = -std::numeric_limits<double>::infinity();
      for (std::size_t h = 0; h < k; ++h) {
        double v = 0.0, p = 1.0, lp = 0.0;
        for (auto j : dumpster) {
          v += inst.value(j);
          p *= inst.prob(h, j);
          lp += inst.log_prob(h, j);
        }
        const double d = loads.delta(h, v, p, lp, dumpster.size());
        if (d > target_delta) {
          target_delta = d;
          target = h;
        }
      }
      for (auto j : dumpster) a[j] = static_cast<std::uint32_t>(target);
      meta["dumpster_handler"] = std::to_string(target + 1);
    }
  }
  return make_report(inst, Allocation(std::move(a)), std::string(to_string(variant)), clock,
                     std::move(meta));
}

/// Grid cells per dimension for DP-H: the smallest g with g^k >= n.
inline std::size_t dp_h_blocks(std::size_t n, std::size_t k) {
  std::size_t g = 1;
  while (true) {
    double cells = 1.0;
    for (std::size_t i = 0; i < k && cells < static_cast<double>(n); ++i) cells *= static_cast<double>(g);
    if (cells >= static_cast<double>(n)) return g;
    ++g;
  }
}

/// DP over states trimmed to a uniform grid: g blocks per dimension over
/// [0, sum v] for each V_i and [0, 1] for each P_i. Each occupied cell keeps
/// its highest-ES state; if more than n cells are occupied the n best stay.
inline SolveReport dp_h(const Instance& inst) {
  Stopwatch clock;
  const std::size_t n = inst.n(), k = inst.k();
  const std::size_t g = dp_h_blocks(n, k);
  const double gd = static_cast<double>(g);
  const double vmax = inst.total_value();
  auto v_block = [&](double v) {
    return static_cast<std::int64_t>(std::min(gd - 1.0, std::floor(v / vmax * gd)));
  };
  auto p_block = [&](double lp) {
    return static_cast<std::int64_t>(std::min(gd - 1.0, std::floor(std::exp(lp) * gd)));
  };

  struct Cand {
    std::uint32_t parent;
    std::uint32_t handler;
    std::int64_t vb, pb;
    double es;
    std::uint64_t hash;
  };

  detail::StateLayer layer(k);
  layer.push_root();
  std::vector<std::int64_t> keys(2 * k, 0);
  for (std::size_t i = 0; i < k; ++i) keys[k + i] = g - 1;  // P = 1
  std::vector<std::uint64_t> hashes(1, 0);
  for (std::size_t d = 0; d < 2 * k; ++d) hashes[0] += detail::coordinate_hash(d, keys[d]);

  detail::History history(k);
  std::vector<Cand> kept;
  std::unordered_multimap<std::uint64_t, std::uint32_t> cells;
  std::size_t peak_cells = 1;

  auto key_at = [&](const Cand& c, std::size_t d) {
    if (d == c.handler) return c.vb;
    if (d == k + c.handler) return c.pb;
    return keys[c.parent * 2 * k + d];
  };

  for (std::size_t j = 0; j < n; ++j) {
    const double v = inst.value(j);
    kept.clear();
    cells.clear();
    cells.reserve(layer.size() * k);
    for (std::uint32_t s = 0; s < layer.size(); ++s) {
      auto vals = layer.values(s);
      auto lps = layer.log_probs(s);
      const std::int64_t* pk = keys.data() + s * 2 * k;
      for (std::uint32_t h = 0; h < k; ++h) {
        const double nv = vals[h] + v;
        const double nlp = lps[h] + inst.log_prob(h, j);
        Cand c{s, h, v_block(nv), p_block(nlp),
               layer.es(s) - vals[h] * std::exp(lps[h]) + nv * std::exp(nlp), 0};
        c.hash = hashes[s] - detail::coordinate_hash(h, pk[h]) - detail::coordinate_hash(k + h, pk[k + h]) +
                 detail::coordinate_hash(h, c.vb) + detail::coordinate_hash(k + h, c.pb);
        bool placed = false;
        auto [lo, hi] = cells.equal_range(c.hash);
        for (auto it = lo; it != hi && !placed; ++it) {
          auto& other = kept[it->second];
          bool same = true;
          for (std::size_t d = 0; d < 2 * k && same; ++d) same = key_at(other, d) == key_at(c, d);
          if (same) {
            placed = true;
            if (c.es > other.es) other = c;
          }
        }
        if (placed) continue;
        cells.emplace(c.hash, static_cast<std::uint32_t>(kept.size()));
        kept.push_back(c);
      }
    }
    peak_cells = std::max(peak_cells, kept.size());
    if (kept.size() > n) {
      std::stable_sort(kept.begin(), kept.end(), [](const Cand& a, const Cand& b) { return a.es > b.es; });
      kept.resize(n);
    }
    detail::StateLayer next(k);
    next.reserve(kept.size());
    std::vector<std::int64_t> next_keys;
    next_keys.reserve(kept.size() * 2 * k);
    std::vector<std::uint64_t> next_hashes;
    next_hashes.reserve(kept.size());
    for (const auto& c : kept) {
      next.push_child(layer, c.parent, c.handler, v, inst.log_prob(c.handler, j));
      for (std::size_t d = 0; d < 2 * k; ++d) next_keys.push_back(key_at(c, d));
      next_hashes.push_back(c.hash);
    }
    history.record(next);
    layer = std::move(next);
    keys = std::move(next_keys);
    hashes = std::move(next_hashes);
  }

  for (std::size_t s = 0; s < layer.size(); ++s) layer.recompute_es(s);
  const auto best = detail::best_state(layer);
  auto alloc = history.backtrack(best, detail::identity_order(n));
  return make_report(inst, std::move(alloc), "dp-h", clock,
                     {{"blocks_per_dimension", std::to_string(g)},
                      {"peak_cells", std::to_string(peak_cells)}});
}

/// Shares of the initial population: random, O-MMR, C-MMR, DP-H.
struct SeedingMix {
  double random = 1.0;
  double o_mmr = 0.0;
  double c_mmr = 0.0;
  double dp_h = 0.0;
};

enum class GaVariant { RandomInheritance, HeuristicInitialized };

struct GaConfig {
  GaVariant variant = GaVariant::RandomInheritance;
  std::size_t population = 1000;
  std::size_t generations = 1000;
  std::size_t couples_per_generation = 1000;
  std::uint64_t seed = 1;
  double mutation_rate = 0.01;
  SeedingMix seeding_mix{};

  static GaConfig ri_ga(std::uint64_t seed = 1) {
    GaConfig c;
    c.seed = seed;
    return c;
  }
  static GaConfig hi_ga(std::uint64_t seed = 1) {
    GaConfig c;
    c.variant = GaVariant::HeuristicInitialized;
    c.seed = seed;
    c.seeding_mix = {0.60, 0.15, 0.15, 0.10};
    return c;
  }

  void validate() const {
    if (population == 0) throw ValidationError("population: must be positive");
    if (couples_per_generation == 0) throw ValidationError("couples: must be positive");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
      throw ValidationError("mutation-rate: must lie in [0, 1]");
    }
    const SeedingMix& m = seeding_mix;
    if (m.random < 0 || m.o_mmr < 0 || m.c_mmr < 0 || m.dp_h < 0 ||
        std::fabs(m.random + m.o_mmr + m.c_mmr + m.dp_h - 1.0) > 1e-9) {
      throw ValidationError("seeding-mix: fractions must be non-negative and sum to 1");
    }
  }
};

struct Individual {
  Allocation chromosomes;
  double fitness = 0.0;
};

namespace detail {

/// Individual plus what crossover needs: handler ES values, handlers ranked
/// by ES descending, and objects grouped by handler.
struct GaMember {
  std::vector<std::uint32_t> genes;
  double fitness = 0.0;
  std::vector<double> handler_es;
  std::vector<std::uint32_t> ranked;   // non-empty handlers, best first
  std::vector<std::uint32_t> offsets;  // k + 1 offsets into `objects`
  std::vector<std::uint32_t> objects;
};

class GaEngine {
 public:
  GaEngine(const Instance& inst, std::mt19937_64& rng) : inst_(inst), rng_(rng) {}

  void score(GaMember& m) {
    const std::size_t k = inst_.k(), n = inst_.n();
    m.fitness = accumulate(inst_, m.genes, scratch_);
    m.handler_es.resize(k);
    m.offsets.assign(k + 1, 0);
    m.ranked.clear();
    for (std::size_t h = 0; h < k; ++h) {
      m.handler_es[h] = scratch_.count[h] ? scratch_.value[h] * scratch_.handler_prob(h) : 0.0;
      m.offsets[h + 1] = m.offsets[h] + static_cast<std::uint32_t>(scratch_.count[h]);
      if (scratch_.count[h]) m.ranked.push_back(static_cast<std::uint32_t>(h));
    }
    std::sort(m.ranked.begin(), m.ranked.end(), [&](std::uint32_t a, std::uint32_t b) {
      return m.handler_es[a] != m.handler_es[b] ? m.handler_es[a] > m.handler_es[b] : a < b;
    });
    m.objects.resize(n);
    fill_.assign(m.offsets.begin(), m.offsets.end() - 1);
    for (std::size_t j = 0; j < n; ++j) m.objects[fill_[m.genes[j]]++] = static_cast<std::uint32_t>(j);
  }

  /// Whole handler groups of both parents, most profitable first, are copied
  /// when neither the handler nor any of their objects is taken yet.
  void crossover(const GaMember& a, const GaMember& b, GaVariant variant, GaMember& child) {
    const std::size_t n = inst_.n(), k = inst_.k();
    child.genes.assign(n, Allocation::kUnassigned);
    used_.assign(k, 0);
    std::size_t ia = 0, ib = 0;
    while (ia < a.ranked.size() || ib < b.ranked.size()) {
      const bool take_a = ib >= b.ranked.size() ||
                          (ia < a.ranked.size() && a.handler_es[a.ranked[ia]] >= b.handler_es[b.ranked[ib]]);
      const GaMember& p = take_a ? a : b;
      const std::uint32_t h = take_a ? a.ranked[ia++] : b.ranked[ib++];
      if (used_[h]) continue;
      bool free = true;
      for (auto t = p.offsets[h]; t < p.offsets[h + 1] && free; ++t) {
        free = child.genes[p.objects[t]] == Allocation::kUnassigned;
      }
      if (!free) continue;
      used_[h] = 1;
      for (auto t = p.offsets[h]; t < p.offsets[h + 1]; ++t) child.genes[p.objects[t]] = h;
    }
    if (variant == GaVariant::RandomInheritance) {
      const double total = a.fitness + b.fitness;
      const double share_a = total > 0.0 ? a.fitness / total : 0.5;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (child.genes[j] == Allocation::kUnassigned) child.genes[j] = u(rng_) < share_a ? a.genes[j] : b.genes[j];
      }
    } else {
      std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(k - 1));
      for (std::size_t j = 0; j < n; ++j) {
        if (child.genes[j] == Allocation::kUnassigned) child.genes[j] = pick(rng_);
      }
    }
  }

  /// Each chromosome independently moves to a uniform random handler with
  /// probability `rate`; positions are drawn by geometric skips.
  void mutate(GaMember& m, double rate) {
    if (rate <= 0.0) return;
    const std::size_t n = inst_.n();
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(inst_.k() - 1));
    if (rate >= 1.0) {
      for (auto& g : m.genes) g = pick(rng_);
      return;
    }
    std::geometric_distribution<std::size_t> skip(rate);
    for (std::size_t j = skip(rng_); j < n; j += 1 + skip(rng_)) m.genes[j] = pick(rng_);
  }

 private:
  const Instance& inst_;
  std::mt19937_64& rng_;
  EvalScratch scratch_;
  std::vector<std::uint32_t> fill_;
  std::vector<std::uint8_t> used_;
};

}  // namespace detail

/// Generational GA with roulette selection, one child per couple and
/// replacement of the worst individuals (the best always survives).
inline SolveReport genetic(const Instance& inst, const GaConfig& cfg) {
  Stopwatch clock;
  cfg.validate();
  const std::size_t n = inst.n(), k = inst.k();
  std::mt19937_64 rng(cfg.seed);
  detail::GaEngine engine(inst, rng);

  const auto pop = cfg.population;
  const auto pd = static_cast<double>(pop);
  const auto n_ommr = static_cast<std::size_t>(std::floor(cfg.seeding_mix.o_mmr * pd + 1e-9));
  const auto n_cmmr = static_cast<std::size_t>(std::floor(cfg.seeding_mix.c_mmr * pd + 1e-9));
  const auto n_dph = static_cast<std::size_t>(std::floor(cfg.seeding_mix.dp_h * pd + 1e-9));
  const std::size_t seeded = std::min(pop, n_ommr + n_cmmr + n_dph);

  std::vector<detail::GaMember> population(pop);
  std::size_t at = 0;
  auto seed_with = [&](std::size_t count, auto&& solve) {
    if (count == 0 || at >= pop) return;
    const auto seed_report = solve();
    const auto genes = seed_report.allocation.handlers();
    for (std::size_t c = 0; c < count && at < pop; ++c) population[at++].genes.assign(genes.begin(), genes.end());
  };
  seed_with(n_ommr, [&] { return mmr(inst, MmrVariant::Ordered); });
  seed_with(n_cmmr, [&] { return mmr(inst, MmrVariant::Clairvoyant); });
  seed_with(n_dph, [&] { return dp_h(inst); });
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(k - 1));
  for (; at < pop; ++at) {
    auto& g = population[at].genes;
    g.resize(n);
    for (auto& x : g) x = pick(rng);
  }
  for (auto& m : population) engine.score(m);

  auto best_of = [&] {
    std::size_t b = 0;
    for (std::size_t i = 1; i < pop; ++i)
      if (population[i].fitness > population[b].fitness) b = i;
    return b;
  };
  std::vector<std::uint32_t> best_genes = population[best_of()].genes;
  double best_fitness = population[best_of()].fitness;
  std::size_t best_generation = 0;
  std::string trace = "0:" + format_number(best_fitness);

  const std::size_t couples = cfg.couples_per_generation;
  const std::size_t replace = std::min(couples, pop - 1);
  std::vector<detail::GaMember> children(couples);
  std::vector<double> prefix(pop);
  std::vector<std::size_t> rank(pop), child_rank(couples);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t gen = 1; gen <= cfg.generations && replace > 0; ++gen) {
    double total = 0.0;
    for (std::size_t i = 0; i < pop; ++i) prefix[i] = total += population[i].fitness;
    auto select = [&]() -> const detail::GaMember& {
      if (!(total > 0.0)) return population[std::uniform_int_distribution<std::size_t>(0, pop - 1)(rng)];
      const double r = unit(rng) * total;
      auto it = std::upper_bound(prefix.begin(), prefix.end(), r);
      return population[std::min<std::size_t>(it - prefix.begin(), pop - 1)];
    };
    for (auto& child : children) {
      const auto& a = select();
      const auto& b = select();
      engine.crossover(a, b, cfg.variant, child);
      engine.mutate(child, cfg.mutation_rate);
      engine.score(child);
    }
    // The best `replace` children take the places of the worst individuals.
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t x, std::size_t y) { return population[x].fitness > population[y].fitness; });
    std::iota(child_rank.begin(), child_rank.end(), std::size_t{0});
    std::stable_sort(child_rank.begin(), child_rank.end(),
                     [&](std::size_t x, std::size_t y) { return children[x].fitness > children[y].fitness; });
    for (std::size_t r = 0; r < replace; ++r) std::swap(population[rank[pop - 1 - r]], children[child_rank[r]]);

    const auto b = best_of();
    if (population[b].fitness > best_fitness) {
      best_fitness = population[b].fitness;
      best_genes = population[b].genes;
      best_generation = gen;
      trace += ',' + std::to_string(gen) + ':' + format_number(best_fitness);
    }
  }

  const std::string name = cfg.variant == GaVariant::RandomInheritance ? "ri-ga" : "hi-ga";
  return make_report(inst, Allocation(std::move(best_genes)), name, clock,
                     {{"generations", std::to_string(cfg.generations)},
                      {"population", std::to_string(pop)},
                      {"couples", std::to_string(couples)},
                      {"mutation_rate", format_number(cfg.mutation_rate)},
                      {"seed", std::to_string(cfg.seed)},
                      {"seeded_individuals", std::to_string(seeded)},
                      {"best_generation", std::to_string(best_generation)},
                      {"best_trace", trace}});
}

}  // namespace doh
