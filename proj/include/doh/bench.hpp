// Instance generators (random and 3-Partition reductions), the upper bound
// used as the quality denominator, and the seeded experiment harness.
#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "doh/dispatch.hpp"
#include "doh/io.hpp"

namespace doh {

struct Range {
  double lo;
  double hi;
};

struct GenSpec {
  std::size_t n = 1;
  std::size_t k = 1;
  Range value{1.0, 100.0};
  Range prob{0.05, 0.99};
  std::uint64_t seed = 1;
  bool identical_values = false;
  bool row_constant = false;     // p_ij = p_i
  bool column_constant = false;  // p_ij = p_j

  void validate() const {
    if (n == 0 || k == 0) throw ValidationError("gen: n and k must be positive");
    if (!(value.lo > 0.0 && value.lo <= value.hi && std::isfinite(value.hi))) {
      throw ValidationError("gen: value bounds must satisfy 0 < lo <= hi");
    }
    if (!(prob.lo > 0.0 && prob.lo <= prob.hi && prob.hi <= 1.0)) {
      throw ValidationError("gen: probability bounds must satisfy 0 < lo <= hi <= 1");
    }
  }
};

namespace detail {

inline double draw(std::mt19937_64& rng, Range r) {
  if (r.lo == r.hi) return r.lo;
  double x = std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
  return x > 0.0 ? x : r.lo;
}

}  // namespace detail

/// Values then probabilities (row-major), each drawn independently unless a
/// structure flag ties them together.
inline Instance gen_random(const GenSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<double> values(spec.n);
  if (spec.identical_values) {
    std::fill(values.begin(), values.end(), detail::draw(rng, spec.value));
  } else {
    for (auto& v : values) v = detail::draw(rng, spec.value);
  }
  std::vector<double> probs(spec.k * spec.n);
  if (spec.row_constant && spec.column_constant) {
    std::fill(probs.begin(), probs.end(), detail::draw(rng, spec.prob));
  } else if (spec.row_constant) {
    for (std::size_t i = 0; i < spec.k; ++i) {
      std::fill_n(probs.begin() + i * spec.n, spec.n, detail::draw(rng, spec.prob));
    }
  } else if (spec.column_constant) {
    for (std::size_t j = 0; j < spec.n; ++j) {
      const double p = detail::draw(rng, spec.prob);
      for (std::size_t i = 0; i < spec.k; ++i) probs[i * spec.n + j] = p;
    }
  } else {
    for (auto& p : probs) p = detail::draw(rng, spec.prob);
  }
  return Instance(std::move(values), spec.k, std::move(probs));
}

/// sum_j v_j max_i p_ij, an upper bound on every allocation's ES.
inline double upper_bound(const Instance& inst) {
  double total = 0.0;
  for (std::size_t j = 0; j < inst.n(); ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < inst.k(); ++i) best = std::max(best, inst.prob(i, j));
    total += inst.value(j) * best;
  }
  return total;
}

struct ThreePartitionInstance {
  std::vector<std::uint64_t> x;
  std::size_t n_triples = 0;
  std::uint64_t target_b = 0;

  /// Derives n and B from the elements.
  static ThreePartitionInstance from_elements(std::vector<std::uint64_t> x) {
    if (x.empty() || x.size() % 3 != 0) throw ValidationError("x: length must be a positive multiple of 3");
    std::uint64_t sum = 0;
    for (auto e : x) {
      if (e == 0) throw ValidationError("x: elements must be positive");
      sum += e;
    }
    const std::size_t n = x.size() / 3;
    if (sum % n != 0) throw ValidationError("x: sum must be divisible by n = " + std::to_string(n));
    return {std::move(x), n, sum / n};
  }

  /// Elements strictly between B/4 and B/2, the usual 3-Partition premise
  /// under which every group of sum B is a triple.
  bool strict_bounds() const {
    return std::all_of(x.begin(), x.end(), [&](std::uint64_t e) { return 4 * e > target_b && 2 * e < target_b; });
  }
};

/// Whether the elements split into n groups of exactly three, each summing
/// to B. Exhaustive; meant for small inputs.
inline bool three_partition_feasible(const ThreePartitionInstance& tp) {
  std::vector<std::uint64_t> x = tp.x;
  std::sort(x.begin(), x.end(), std::greater<>());
  std::vector<bool> used(x.size(), false);
  // Fill triples one at a time, each started by the largest unused element.
  auto rec = [&](auto&& self, std::size_t done) -> bool {
    if (done == tp.n_triples) return true;
    std::size_t a = 0;
    while (used[a]) ++a;
    used[a] = true;
    for (std::size_t b = a + 1; b < x.size(); ++b) {
      if (used[b] || x[a] + x[b] >= tp.target_b) continue;
      used[b] = true;
      for (std::size_t c = b + 1; c < x.size(); ++c) {
        if (used[c] || x[a] + x[b] + x[c] != tp.target_b) continue;
        used[c] = true;
        if (self(self, done + 1)) return true;
        used[c] = false;
      }
      used[b] = false;
    }
    used[a] = false;
    return false;
  };
  return rec(rec, 0);
}

inline ThreePartitionInstance load_three_partition(const std::string& path) {
  const auto j = detail::read_json_file(path);
  const auto& arr = detail::require_field(j, "x");
  if (!arr.is_array()) throw ValidationError("x: expected an array of positive integers");
  std::vector<std::uint64_t> x;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number_integer() || arr[i].get<std::int64_t>() <= 0) {
      throw ValidationError("x[" + std::to_string(i) + "]: expected a positive integer");
    }
    x.push_back(arr[i].get<std::uint64_t>());
  }
  return ThreePartitionInstance::from_elements(std::move(x));
}

struct ReductionParams {
  double base_b = 0.0;
  double threshold_r = 0.0;
};

/// Midpoint of (1, e^{4/(nB)}) rounded to the fraction with the smallest
/// denominator that stays within a quarter of the interval of the midpoint.
inline double default_base(const ThreePartitionInstance& tp) {
  const double nb = static_cast<double>(tp.n_triples) * static_cast<double>(tp.target_b);
  const double width = std::expm1(4.0 / nb);
  const double mid = 1.0 + width / 2.0;
  for (std::uint64_t den = 1;; ++den) {
    const double num = std::round(mid * static_cast<double>(den));
    const double b = num / static_cast<double>(den);
    if (std::fabs(b - mid) <= width / 4.0) return b;
  }
}

struct ReducedInstance {
  Instance instance;
  ReductionParams params;
};

/// v_j = x_j, p_ij = b^{-x_j} on n handlers, r = n B b^{-B}.
inline ReducedInstance reduce_3p(const ThreePartitionInstance& tp, double b) {
  const double nb = static_cast<double>(tp.n_triples) * static_cast<double>(tp.target_b);
  if (!(b > 1.0 && std::log(b) < 4.0 / nb)) {
    throw ValidationError("base: b must lie in (1, e^{4/(nB)}) = (1, " + format_number(std::exp(4.0 / nb)) + ")");
  }
  const double ln_b = std::log(b);
  std::vector<double> values;
  std::vector<double> row;
  for (auto e : tp.x) {
    values.push_back(static_cast<double>(e));
    row.push_back(std::exp(-static_cast<double>(e) * ln_b));
  }
  std::vector<double> probs;
  for (std::size_t i = 0; i < tp.n_triples; ++i) probs.insert(probs.end(), row.begin(), row.end());
  const double r = std::exp(std::log(nb) - static_cast<double>(tp.target_b) * ln_b);
  return {Instance(std::move(values), tp.n_triples, std::move(probs)), {b, r}};
}

inline ReducedInstance reduce_3p(const ThreePartitionInstance& tp) { return reduce_3p(tp, default_base(tp)); }

// ---------------------------------------------------------------------------
// Experiment harness

inline const std::vector<std::pair<std::size_t, std::size_t>>& default_grid() {
  static const std::vector<std::pair<std::size_t, std::size_t>> grid = {
      {25, 5}, {25, 10}, {50, 10}, {50, 25}, {100, 25}, {100, 50}, {250, 25}, {250, 50}, {250, 100}};
  return grid;
}

inline const std::vector<std::string>& default_solvers() {
  static const std::vector<std::string> s = {"o-mmr", "c-mmr", "dp-h", "ri-ga", "hi-ga"};
  return s;
}

struct ExperimentConfig {
  std::vector<std::pair<std::size_t, std::size_t>> grid = default_grid();
  std::size_t trials = 50;
  std::vector<std::string> solvers = default_solvers();
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  GenSpec gen{};             // n, k and seed are overwritten per trial
  SolverOptions solver{};    // seed is overwritten per trial
};

struct TrialRecord {
  std::size_t n = 0, k = 0;
  std::string solver;
  std::size_t trial = 0;
  double es = 0.0;
  double upper_bound = 0.0;
  double ratio = 0.0;
  double wall_ms = 0.0;
};

struct CellSummary {
  std::size_t n = 0, k = 0;
  std::string solver;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single trial
  double max_wall_ms = 0.0;
};

struct ExperimentTable {
  std::vector<TrialRecord> records;  // grid-major, then trial, then solver
  std::vector<CellSummary> cells;    // grid-major, then solver
  std::vector<std::string> solvers;
};

/// Seed of one trial, from the master seed and the cell coordinates.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t n, std::size_t k, std::size_t trial) {
  std::uint64_t h = detail::mix64(master);
  h = detail::mix64(h ^ n);
  h = detail::mix64(h ^ k);
  return detail::mix64(h ^ trial);
}

/// Runs every (cell, trial, solver) combination. Results do not depend on
/// the thread count: each trial's instance and solver seeds derive from its
/// coordinates only.
inline ExperimentTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials == 0) throw ValidationError("trials: must be at least 1");
  if (cfg.solvers.empty()) throw ValidationError("solvers: at least one solver is required");
  for (const auto& s : cfg.solvers) {
    if (!is_method(s)) throw std::invalid_argument("unknown method '" + s + "'");
  }
  const std::size_t per_cell = cfg.trials * cfg.solvers.size();
  ExperimentTable table;
  table.solvers = cfg.solvers;
  table.records.resize(cfg.grid.size() * per_cell);

  // One task per (cell, trial); solvers of a trial share its instance.
  const std::size_t tasks = cfg.grid.size() * cfg.trials;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      try {
        const auto [n, k] = cfg.grid[t / cfg.trials];
        const std::size_t trial = t % cfg.trials;
        const std::uint64_t seed = trial_seed(cfg.seed, n, k, trial);
        GenSpec spec = cfg.gen;
        spec.n = n;
        spec.k = k;
        spec.seed = seed;
        const Instance inst = gen_random(spec);
        const double ub = upper_bound(inst);
        SolverOptions opt = cfg.solver;
        opt.seed = detail::mix64(seed ^ 0x5851f42d4c957f2dULL);
        for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
          const auto r = solve_by_name(inst, cfg.solvers[s], opt);
          auto& rec = table.records[t * cfg.solvers.size() + s];
          rec = {n, k, cfg.solvers[s], trial, r.es, ub, r.es / ub, r.wall_time.count()};
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, tasks));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t c = 0; c < cfg.grid.size(); ++c) {
    for (std::size_t s = 0; s < cfg.solvers.size(); ++s) {
      CellSummary cell{cfg.grid[c].first, cfg.grid[c].second, cfg.solvers[s], 0.0, 0.0, 0.0};
      double sum = 0.0;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto& rec = table.records[(c * cfg.trials + t) * cfg.solvers.size() + s];
        sum += rec.ratio;
        cell.max_wall_ms = std::max(cell.max_wall_ms, rec.wall_ms);
      }
      cell.mean = sum / static_cast<double>(cfg.trials);
      if (cfg.trials > 1) {
        double sq = 0.0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          const double d = table.records[(c * cfg.trials + t) * cfg.solvers.size() + s].ratio - cell.mean;
          sq += d * d;
        }
        cell.stddev = std::sqrt(sq / static_cast<double>(cfg.trials - 1));
      }
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

/// Per-trial CSV. With include_timing off the wall_ms field is left empty so
/// reruns produce identical bytes.
inline std::string to_csv(const ExperimentTable& t, bool include_timing = false) {
  std::ostringstream out;
  out << "n,k,solver,trial,es,upper_bound,ratio,wall_ms\n";
  for (const auto& r : t.records) {
    out << r.n << ',' << r.k << ',' << r.solver << ',' << r.trial << ',' << format_number(r.es) << ','
        << format_number(r.upper_bound) << ',' << format_number(r.ratio) << ',';
    if (include_timing) out << format_number(r.wall_ms);
    out << '\n';
  }
  return out.str();
}

/// One row per (n, k) with {"mu", "sigma"} per solver.
inline Json to_json(const ExperimentTable& t, bool include_timing = false) {
  Json rows = Json::array();
  const std::size_t s = t.solvers.size();
  for (std::size_t c = 0; c < t.cells.size(); c += s) {
    Json row;
    row["n"] = t.cells[c].n;
    row["k"] = t.cells[c].k;
    for (std::size_t i = 0; i < s; ++i) {
      const auto& cell = t.cells[c + i];
      Json e{{"mu", detail::round_sig12(cell.mean)}, {"sigma", detail::round_sig12(cell.stddev)}};
      if (include_timing) e["max_wall_ms"] = detail::round_sig12(cell.max_wall_ms);
      row[cell.solver] = e;
    }
    rows.push_back(row);
  }
  return Json{{"solvers", t.solvers}, {"rows", rows}};
}

/// Fixed-width table, one row per (n, k) with mu and sigma per solver.
inline std::string format_table(const ExperimentTable& t) {
  std::ostringstream out;
  char buf[64];
  out << "    n     k";
  for (const auto& s : t.solvers) {
    std::snprintf(buf, sizeof buf, " | %-15s", s.c_str());
    out << buf;
  }
  out << "\n           ";
  for (std::size_t i = 0; i < t.solvers.size(); ++i) out << " |   mu     sigma ";
  out << '\n';
  const std::size_t s = t.solvers.size();
  for (std::size_t c = 0; c < t.cells.size(); c += s) {
    std::snprintf(buf, sizeof buf, "%5zu %5zu", t.cells[c].n, t.cells[c].k);
    out << buf;
    for (std::size_t i = 0; i < s; ++i) {
      std::snprintf(buf, sizeof buf, " | %.3f   %.3f ", t.cells[c + i].mean, t.cells[c + i].stddev);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace doh
