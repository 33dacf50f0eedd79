// Polynomial solvers for structured instance classes:
//   io    identical objects, p_ij = p_i        (count allocation)
//   ihv   identical handlers and values, p_ij = p_j   (contiguous blocks by p)
//   ir    identical risks, p_ij = p_i, free values    (contiguous blocks by v)
//   ioih  everything identical                        (even split / overload)
//   eo    at most one object per handler              (weighted matching)
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doh/assignment.hpp"
#include "doh/core.hpp"

namespace doh {

/// Per-handler maximizer x_{i,1} of F_i(x) = x p_i^x and the inflection
/// point x_{i,2} of its gradient; kUnbounded when p_i = 1.
struct InflectionPoints {
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  std::vector<std::size_t> x1;
  std::vector<std::size_t> x2;
  std::vector<double> continuous_x1;  // -1 / ln p_i
  std::vector<double> continuous_x2;  // -2 / ln p_i
};

struct CountAllocation {
  std::vector<std::size_t> counts;  // o_i = |S_i|
  friend bool operator==(const CountAllocation&, const CountAllocation&) = default;
};

/// F(x) = x p^x.
inline double count_value(double p, std::size_t x) {
  if (x == 0) return 0.0;
  return static_cast<double>(x) * std::pow(p, static_cast<double>(x));
}

inline InflectionPoints inflection_points(std::span<const double> p) {
  InflectionPoints out;
  for (double pi : p) {
    if (!(pi > 0.0 && pi <= 1.0)) throw ValidationError("inflection_points: p must lie in (0, 1]");
    if (pi == 1.0) {
      out.x1.push_back(InflectionPoints::kUnbounded);
      out.x2.push_back(InflectionPoints::kUnbounded);
      out.continuous_x1.push_back(std::numeric_limits<double>::infinity());
      out.continuous_x2.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double c1 = -1.0 / std::log(pi);
    const double c2 = -2.0 / std::log(pi);
    const auto lo = static_cast<std::size_t>(std::floor(c1));
    const auto hi = static_cast<std::size_t>(std::ceil(c1));
    out.x1.push_back(count_value(pi, hi) > count_value(pi, lo) ? hi : lo);
    out.x2.push_back(static_cast<std::size_t>(std::ceil(c2)));
    out.continuous_x1.push_back(c1);
    out.continuous_x2.push_back(c2);
  }
  return out;
}

inline double count_objective(std::span<const double> p, const CountAllocation& c) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += count_value(p[i], c.counts[i]);
  return total;
}

/// Maximum marginal return on counts: each object goes to the handler with
/// the largest F_i(o_i + 1) - F_i(o_i), lowest index on ties.
inline CountAllocation mmr_counts(std::span<const double> p, std::size_t n) {
  CountAllocation c{std::vector<std::size_t>(p.size(), 0)};
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t best = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gain = count_value(p[i], c.counts[i] + 1) - count_value(p[i], c.counts[i]);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    ++c.counts[best];
  }
  return c;
}

/// Overload candidates for n > sum x_{i,1}: every handler but one at its
/// x_{i,1}, the remainder on the overloaded one; best candidate, lowest
/// overloaded index on ties. Requires every p_i < 1.
inline CountAllocation sacrificial_counts(std::span<const double> p, std::span<const std::size_t> x1,
                                          std::size_t n) {
  std::size_t sum = 0;
  for (auto x : x1) sum += x;
  CountAllocation best;
  double best_value = -1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    CountAllocation c{std::vector<std::size_t>(x1.begin(), x1.end())};
    c.counts[i] = n - (sum - x1[i]);
    const double value = count_objective(p, c);
    if (value > best_value) {
      best_value = value;
      best = std::move(c);
    }
  }
  return best;
}

/// Exact maximum of sum_i F_i(o_i) subject to sum_i o_i = n, by a DP over
/// handlers; O(k n^2). Ties keep the smaller count on the later handler.
inline CountAllocation optimal_counts(std::span<const double> p, std::size_t n) {
  const std::size_t k = p.size();
  const double neg = -std::numeric_limits<double>::infinity();
  // best[i][m]: max value using handlers 0..i-1 for m objects.
  std::vector<std::vector<double>> best(k + 1, std::vector<double>(n + 1, neg));
  std::vector<std::vector<std::size_t>> take(k + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0.0;
  std::vector<double> f(n + 1);
  for (std::size_t i = 1; i <= k; ++i) {
    for (std::size_t x = 0; x <= n; ++x) f[x] = count_value(p[i - 1], x);
    for (std::size_t m = 0; m <= n; ++m) {
      for (std::size_t x = 0; x <= m; ++x) {
        if (best[i - 1][m - x] == neg) continue;
        const double cand = best[i - 1][m - x] + f[x];
        if (cand > best[i][m]) {
          best[i][m] = cand;
          take[i][m] = x;
        }
      }
    }
  }
  CountAllocation c{std::vector<std::size_t>(k, 0)};
  std::size_t m = n;
  for (std::size_t i = k; i > 0; --i) {
    c.counts[i - 1] = take[i][m];
    m -= take[i][m];
  }
  return c;
}

/// Identical handlers: floor/ceil even split when n <= k x1, otherwise the
/// overload start <x1,...,x1, n-(k-1)x1> followed by the one-object shift loop.
inline CountAllocation ioih_counts(double p, std::size_t n, std::size_t k) {
  CountAllocation c{std::vector<std::size_t>(k, 0)};
  std::size_t x1 = inflection_points(std::span<const double>(&p, 1)).x1.front();
  x1 = std::min(x1, n);
  if (n <= k * x1) {
    for (std::size_t i = 0; i < k; ++i) c.counts[i] = n / k + (i >= k - n % k ? 1 : 0);
    if (n % k == 0) std::fill(c.counts.begin(), c.counts.end(), n / k);
    return c;
  }
  std::fill(c.counts.begin(), c.counts.end(), x1);
  c.counts[k - 1] = n - (k - 1) * x1;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    auto& last = c.counts[k - 1];
    const double drop_last = count_value(p, last - 1) - count_value(p, last);
    const double drop_i = count_value(p, c.counts[i]) - count_value(p, c.counts[i] + 1);
    if (drop_last > drop_i) {
      --last;
      ++c.counts[i];
    }
  }
  return c;
}

namespace detail {

/// Objects in `order` handed out in consecutive blocks of `counts`, where
/// block b goes to handler `handlers[b]`.
inline Allocation blocks_to_allocation(std::size_t n, std::span<const std::size_t> order,
                                       std::span<const std::size_t> counts,
                                       std::span<const std::size_t> handlers) {
  std::vector<std::uint32_t> a(n, Allocation::kUnassigned);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    for (std::size_t t = 0; t < counts[b]; ++t) a[order[pos++]] = static_cast<std::uint32_t>(handlers[b]);
  }
  return Allocation(std::move(a));
}

inline Allocation counts_to_allocation(std::size_t n, const CountAllocation& c) {
  std::vector<std::size_t> order(n), handlers(c.counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::iota(handlers.begin(), handlers.end(), std::size_t{0});
  return blocks_to_allocation(n, order, c.counts, handlers);
}

inline std::vector<double> row_constants(const Instance& inst) {
  std::vector<double> p(inst.k());
  for (std::size_t i = 0; i < inst.k(); ++i) p[i] = inst.prob(i, 0);
  return p;
}

inline std::string counts_string(const CountAllocation& c) {
  std::string s;
  for (auto x : c.counts) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

inline void require(bool ok, std::string_view solver, std::string_view need) {
  if (!ok) {
    throw ClassMismatchError(std::string(solver) + ": instance is not " + std::string(need));
  }
}

}  // namespace detail

/// Identical objects (equal values, p_ij = p_i).
inline SolveReport solve_io_doh(const Instance& inst) {
  Stopwatch clock;
  detail::require(values_identical(inst) && probs_row_constant(inst), "io-doh",
                  "identical-objects (equal values, row-constant probabilities)");
  const auto p = detail::row_constants(inst);
  const std::size_t n = inst.n();
  const auto pts = inflection_points(p);
  std::size_t sum_x1 = 0;
  bool unbounded = false;
  for (auto x : pts.x1) {
    if (x == InflectionPoints::kUnbounded) unbounded = true;
    else sum_x1 += x;
  }
  Meta meta{{"sum_x1", unbounded ? "unbounded" : std::to_string(sum_x1)}};
  CountAllocation counts;
  if (unbounded || n <= sum_x1) {
    counts = mmr_counts(p, n);
    meta["branch"] = "mmr";
  } else {
    // The single-overload candidates are not always optimal for integer
    // counts, so they are checked against the exact count DP.
    auto overload = sacrificial_counts(p, pts.x1, n);
    auto exact = optimal_counts(p, n);
    const double ov = count_objective(p, overload);
    const double ex = count_objective(p, exact);
    const bool overload_optimal = ov >= ex * (1.0 - 1e-12);
    counts = overload_optimal ? std::move(overload) : std::move(exact);
    meta["branch"] = "overload";
    meta["overload_candidate_optimal"] = overload_optimal ? "true" : "false";
  }
  meta["counts"] = detail::counts_string(counts);
  return make_report(inst, detail::counts_to_allocation(n, counts), "io-doh", clock, std::move(meta));
}

/// Identical handlers and values (equal values, p_ij = p_j): objects sorted
/// by decreasing p_j are cut into at most k contiguous blocks; O(n^2 k).
inline SolveReport solve_ihv_doh(const Instance& inst) {
  Stopwatch clock;
  detail::require(values_identical(inst) && probs_column_constant(inst), "ihv-doh",
                  "identical-handlers-values (equal values, column-constant probabilities)");
  const std::size_t n = inst.n(), k = inst.k();
  const double v = inst.value(0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return inst.prob(0, a) > inst.prob(0, b); });
  std::vector<double> p(n);
  for (std::size_t t = 0; t < n; ++t) p[t] = inst.prob(0, order[t]);

  const double neg = -std::numeric_limits<double>::infinity();
  // opt[j][i]: best value of the first i sorted objects on j handlers.
  std::vector<double> prev(n + 1, neg), cur(n + 1);
  prev[0] = 0.0;
  std::vector<std::vector<std::uint32_t>> cut(k + 1, std::vector<std::uint32_t>(n + 1, 0));
  for (std::size_t j = 1; j <= k; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      double best = neg;
      std::size_t arg = i;
      double prod = 1.0;
      for (std::size_t l = i;; --l) {
        if (prev[l] != neg) {
          const double cand = prev[l] + static_cast<double>(i - l) * v * prod;
          if (cand > best) {
            best = cand;
            arg = l;
          }
        }
        if (l == 0) break;
        prod *= p[l - 1];
      }
      cur[i] = best;
      cut[j][i] = static_cast<std::uint32_t>(arg);
    }
    std::swap(prev, cur);
  }
  std::vector<std::size_t> counts(k), handlers(k);
  std::size_t i = n;
  for (std::size_t j = k; j > 0; --j) {
    counts[j - 1] = i - cut[j][i];
    handlers[j - 1] = j - 1;
    i = cut[j][i];
  }
  auto alloc = detail::blocks_to_allocation(n, order, counts, handlers);
  return make_report(inst, std::move(alloc), "ihv-doh", clock,
                     {{"counts", detail::counts_string(CountAllocation{counts})}});
}

struct IrOptions {
  /// The exact route enumerates handler subsets in O(2^k k n^2); above this
  /// many steps the ordered-block recurrence (O(n^2 k)) is used instead.
  double exact_budget = 2e8;
};

/// Identical risks (p_ij = p_i): in some optimal allocation every handler
/// holds a contiguous run of the objects sorted by decreasing value, with
/// runs ordered by decreasing p_i^{|S_i|}.
inline SolveReport solve_ir_doh(const Instance& inst, const IrOptions& opt = {}) {
  Stopwatch clock;
  detail::require(probs_row_constant(inst), "ir-doh", "identical-risks (row-constant probabilities)");
  const std::size_t n = inst.n(), k = inst.k();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return inst.value(a) > inst.value(b); });
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + inst.value(order[t]);
  const auto p = detail::row_constants(inst);
  // pw[h][len] = p_h^len
  std::vector<std::vector<double>> pw(k, std::vector<double>(n + 1, 1.0));
  for (std::size_t h = 0; h < k; ++h)
    for (std::size_t len = 1; len <= n; ++len) pw[h][len] = pw[h][len - 1] * p[h];

  const double neg = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> counts, handlers;
  Meta meta;
  const double steps = std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(k, 1000))) *
                       static_cast<double>(k) * static_cast<double>(n) * static_cast<double>(n);
  if (k < 63 && steps <= opt.exact_budget) {
    // dp[mask][i]: best value placing the first i objects in runs on the
    // handlers of `mask`, in some order.
    const std::size_t masks = std::size_t{1} << k;
    std::vector<double> dp(masks * (n + 1), neg);
    std::vector<std::uint32_t> from_i(masks * (n + 1), 0);
    std::vector<std::uint8_t> from_h(masks * (n + 1), 0);
    dp[0] = 0.0;
    for (std::size_t mask = 0; mask < masks; ++mask) {
      for (std::size_t i = 0; i < n; ++i) {
        const double base = dp[mask * (n + 1) + i];
        if (base == neg) continue;
        for (std::size_t h = 0; h < k; ++h) {
          if (mask & (std::size_t{1} << h)) continue;
          const std::size_t to = mask | (std::size_t{1} << h);
          for (std::size_t e = i + 1; e <= n; ++e) {
            const double cand = base + (prefix[e] - prefix[i]) * pw[h][e - i];
            double& slot = dp[to * (n + 1) + e];
            if (cand > slot) {
              slot = cand;
              from_i[to * (n + 1) + e] = static_cast<std::uint32_t>(i);
              from_h[to * (n + 1) + e] = static_cast<std::uint8_t>(h);
            }
          }
        }
      }
    }
    std::size_t best_mask = 0;
    for (std::size_t mask = 1; mask < masks; ++mask) {
      if (dp[mask * (n + 1) + n] > dp[best_mask * (n + 1) + n]) best_mask = mask;
    }
    std::size_t mask = best_mask, i = n;
    while (i > 0) {
      const std::size_t h = from_h[mask * (n + 1) + i];
      const std::size_t l = from_i[mask * (n + 1) + i];
      counts.insert(counts.begin(), i - l);
      handlers.insert(handlers.begin(), h);
      mask &= ~(std::size_t{1} << h);
      i = l;
    }
    meta["route"] = "handler-subsets";
    meta["exact"] = "true";
  } else {
    // Handlers by decreasing p_i, each taking the next (possibly empty) run.
    std::vector<std::size_t> hord(k);
    std::iota(hord.begin(), hord.end(), std::size_t{0});
    std::stable_sort(hord.begin(), hord.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    std::vector<double> prev(n + 1, neg), cur(n + 1);
    prev[0] = 0.0;
    std::vector<std::vector<std::uint32_t>> cut(k + 1, std::vector<std::uint32_t>(n + 1, 0));
    for (std::size_t j = 1; j <= k; ++j) {
      const auto& powers = pw[hord[j - 1]];
      for (std::size_t i = 0; i <= n; ++i) {
        double best = neg;
        std::size_t arg = i;
        for (std::size_t l = i + 1; l-- > 0;) {
          if (prev[l] == neg) continue;
          const double cand = prev[l] + (prefix[i] - prefix[l]) * powers[i - l];
          if (cand > best) {
            best = cand;
            arg = l;
          }
        }
        cur[i] = best;
        cut[j][i] = static_cast<std::uint32_t>(arg);
      }
      std::swap(prev, cur);
    }
    counts.resize(k);
    handlers.resize(k);
    std::size_t i = n;
    for (std::size_t j = k; j > 0; --j) {
      counts[j - 1] = i - cut[j][i];
      handlers[j - 1] = hord[j - 1];
      i = cut[j][i];
    }
    meta["route"] = "ordered-blocks";
    meta["exact"] = "false";
  }
  auto alloc = detail::blocks_to_allocation(n, order, counts, handlers);
  return make_report(inst, std::move(alloc), "ir-doh", clock, std::move(meta));
}

/// Identical objects and handlers (equal values, one probability p).
inline SolveReport solve_ioih_doh(const Instance& inst) {
  Stopwatch clock;
  detail::require(classify(inst) == InstanceClass::AllIdentical, "ioih-doh",
                  "all-identical (equal values, one probability)");
  const std::size_t n = inst.n(), k = inst.k();
  const double p = inst.prob(0, 0);
  auto counts = ioih_counts(p, n, k);
  const std::size_t x1 = std::min(inflection_points(std::span<const double>(&p, 1)).x1.front(), n);
  Meta meta;
  if (n <= k * x1) {
    meta["branch"] = "even-split";
  } else {
    // The shift loop can stop short for integer counts; confirm against the
    // exact count DP.
    const std::vector<double> same(k, p);
    auto exact = optimal_counts(same, n);
    const bool shift_optimal = count_objective(same, counts) >= count_objective(same, exact) * (1.0 - 1e-12);
    if (!shift_optimal) {
      std::sort(exact.counts.begin(), exact.counts.end());
      counts = std::move(exact);
    }
    meta["branch"] = "overload";
    meta["shift_optimal"] = shift_optimal ? "true" : "false";
  }
  meta["counts"] = detail::counts_string(counts);
  return make_report(inst, detail::counts_to_allocation(n, counts), "ioih-doh", clock, std::move(meta));
}

/// At most one object per handler: maximum-weight matching with weights
/// v_j p_ij. Objects left over when n > k stay unassigned.
inline SolveReport solve_eo_doh(const Instance& inst) {
  Stopwatch clock;
  const std::size_t n = inst.n(), k = inst.k();
  std::vector<std::vector<double>> w(n, std::vector<double>(k));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < k; ++i) w[j][i] = inst.value(j) * inst.prob(i, j);
  const auto match = detail::max_weight_assignment(w);
  std::vector<std::uint32_t> a(n, Allocation::kUnassigned);
  std::size_t matched = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (match[j] >= 0) {
      a[j] = static_cast<std::uint32_t>(match[j]);
      ++matched;
    }
  }
  return make_report(inst, Allocation(std::move(a)), "eo-doh", clock,
                     {{"matched", std::to_string(matched)},
                      {"unassigned", std::to_string(n - matched)}});
}

}  // namespace doh
