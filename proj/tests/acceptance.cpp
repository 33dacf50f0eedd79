// Acceptance suite: one PASS/FAIL line per criterion, supporting detail on
// indented "note:" lines. Exit status is the number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <thread>

#include "doh/doh.hpp"

using namespace doh;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& title, const std::string& detail) {
  std::printf("%s  %d  %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& s) {
  std::printf("      note: %s\n", s.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Instance gen(std::uint64_t seed, std::size_t n, std::size_t k, bool same_v = false, bool by_row = false,
             bool by_col = false, Range prob = {0.05, 0.99}) {
  GenSpec s;
  s.n = n;
  s.k = k;
  s.seed = seed;
  s.identical_values = same_v;
  s.row_constant = by_row;
  s.column_constant = by_col;
  s.prob = prob;
  return gen_random(s);
}

/// Shape drawn from the case seed: n in [1, max_n], k in [min_k, max_k].
std::pair<std::size_t, std::size_t> shape(std::uint64_t seed, std::size_t max_n, std::size_t min_k,
                                          std::size_t max_k) {
  const auto h = detail::mix64(seed ^ 0xa5a5a5a5ULL);
  return {1 + h % max_n, min_k + (h >> 32) % (max_k - min_k + 1)};
}

// ---------------------------------------------------------------------------

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  int bad = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto [n, k] = shape(1000 + seed, 8, 1, 3);
    const auto inst = gen(1000 + seed, n, k);
    const double oracle = brute_force(inst).es;
    for (bool prune : {true, false}) {
      const double es = dp_exact(inst, {prune, true}).es;
      worst = std::max(worst, std::fabs(es - oracle) / oracle);
      if (!approx_equal(es, oracle, 1e-9)) ++bad;
    }
  }
  const double secs = seconds_since(t0);
  verdict(1, bad == 0 && secs < 60, "exact DP equals brute force",
          "500 instances n<=8 k<=3, pruning on and off, " + std::to_string(bad) +
              " mismatches, max rel err " + fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s (limit 60 s)");
}

void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  int bad = 0;
  double worst_slack = 1.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto [n, k] = shape(2000 + seed, 10, 2, 2);
    const auto inst = gen(2000 + seed, n, k);
    const double oracle = brute_force(inst).es;
    for (double eps : {0.1, 0.3, 0.5}) {
      const double ratio = fptas(inst, eps).es / oracle;
      worst_slack = std::min(worst_slack, ratio - (1 - eps));
      if (ratio < 1 - eps) ++bad;
    }
  }
  const double secs = seconds_since(t0);
  verdict(2, bad == 0 && secs < 120, "FPTAS within (1 - eps)",
          "200 instances n<=10 k=2, eps in {0.1,0.3,0.5}, " + std::to_string(bad) +
              " violations, min ratio-(1-eps) " + fmt("%.4f", worst_slack) + ", " + fmt("%.1f", secs) +
              " s (limit 120 s)");
}

void criterion3() {
  int bad = 0;
  double min_ratio[2] = {1.0, 1.0};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [n, k] = shape(3000 + seed, 8, 4, 4);
    const auto inst = gen(3000 + seed, n, k);
    const double oracle = brute_force(inst).es;
    for (std::size_t c : {2u, 3u}) {
      const double ratio = subset_approx(inst, c, 0.1).es / oracle;
      min_ratio[c - 2] = std::min(min_ratio[c - 2], ratio);
      if (ratio < 0.9 * static_cast<double>(c - 1) / 4.0) ++bad;
    }
  }
  verdict(3, bad == 0, "subset approximation within (1 - eps)(c - 1)/k",
          "100 instances n<=8 k=4 eps=0.1, " + std::to_string(bad) + " violations, min ratio c=2 " +
              fmt("%.4f", min_ratio[0]) + " (bound 0.225), c=3 " + fmt("%.4f", min_ratio[1]) + " (bound 0.45)");
}

/// Best value over allocations giving each handler at most one object.
double matching_oracle(const Instance& inst) {
  double best = 0.0;
  std::vector<bool> used(inst.k(), false);
  std::function<void(std::size_t, double)> rec = [&](std::size_t j, double acc) {
    if (j == inst.n()) {
      best = std::max(best, acc);
      return;
    }
    rec(j + 1, acc);
    for (std::size_t i = 0; i < inst.k(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      rec(j + 1, acc + inst.value(j) * inst.prob(i, j));
      used[i] = false;
    }
  };
  rec(0, 0.0);
  return best;
}

void criterion4() {
  struct Case {
    const char* name;
    bool same_v, by_row, by_col;
    std::function<SolveReport(const Instance&)> solve;
  };
  const std::vector<Case> cases = {
      {"io", true, true, false, [](const Instance& i) { return solve_io_doh(i); }},
      {"ihv", true, false, true, [](const Instance& i) { return solve_ihv_doh(i); }},
      {"ir", false, true, false, [](const Instance& i) { return solve_ir_doh(i); }},
      {"ioih", true, true, true, [](const Instance& i) { return solve_ioih_doh(i); }},
  };
  std::string detail;
  bool ok = true;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    int bad = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const std::uint64_t s = 4000 + 1000 * c + seed;
      const auto [n, k] = shape(s, 12, 1, 3);
      const auto inst = gen(s, n, k, cases[c].same_v, cases[c].by_row, cases[c].by_col);
      if (!approx_equal(cases[c].solve(inst).es, brute_force(inst).es, 1e-9)) ++bad;
    }
    ok = ok && bad == 0;
    detail += std::string(cases[c].name) + " " + std::to_string(200 - bad) + "/200, ";
  }
  int eo_bad = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto [n, k] = shape(9000 + seed, 12, 1, 3);
    const auto inst = gen(9000 + seed, n, k);
    if (!approx_equal(solve_eo_doh(inst).es, matching_oracle(inst), 1e-9)) ++eo_bad;
  }
  ok = ok && eo_bad == 0;
  detail += "eo " + std::to_string(200 - eo_bad) + "/200 (at-most-one oracle); ";

  for (const char* which : {"ihv", "ir"}) {
    const bool ihv = std::string(which) == "ihv";
    const auto inst = gen(77, 2000, 50, ihv, !ihv, ihv);
    const auto r = ihv ? solve_ihv_doh(inst) : solve_ir_doh(inst);
    const double secs = r.wall_time.count() / 1000.0;
    ok = ok && secs < 5.0;
    detail += std::string(which) + " n=2000 k=50 " + fmt("%.2f", secs) + " s, ";
    if (!ihv) note("ir at n=2000 k=50 took the " + r.meta.at("route") + " route (exact=" + r.meta.at("exact") + ")");
  }
  detail += "limit 5 s";
  verdict(4, ok, "special-case solvers are exact and fast", detail);
}

void criterion5() {
  // (a) identical objects with n > sum x1: one sacrificial handler.
  int a_checked = 0, a_bad = 0;
  std::string a_example;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t k = 1 + seed % 3;
    auto probe = gen(5000 + seed, 1, k, true, true, false, {0.3, 0.9});
    std::vector<double> p(k);
    for (std::size_t i = 0; i < k; ++i) p[i] = probe.prob(i, 0);
    const auto pts = inflection_points(p);
    std::size_t sum = 0;
    for (auto x : pts.x1) sum += x;
    const std::size_t n = sum + 1 + detail::mix64(seed) % 30;
    const Instance inst(std::vector<double>(n, 1.0), k,
                        [&] {
                          std::vector<double> flat;
                          for (double pi : p) flat.insert(flat.end(), n, pi);
                          return flat;
                        }());
    const auto counts = solve_io_doh(inst).allocation.counts(k);
    std::size_t above = 0, at = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (counts[i] > pts.x1[i]) ++above;
      if (counts[i] == pts.x1[i]) ++at;
    }
    ++a_checked;
    if (!(above == 1 && at == k - 1)) {
      ++a_bad;
      if (a_example.empty()) {
        a_example = "p=(";
        for (std::size_t i = 0; i < k; ++i) a_example += (i ? "," : "") + format_number(p[i]);
        a_example += ") n=" + std::to_string(n) + " x1=(";
        for (std::size_t i = 0; i < k; ++i) a_example += (i ? "," : "") + std::to_string(pts.x1[i]);
        a_example += ") optimal counts=(";
        for (std::size_t i = 0; i < k; ++i) a_example += (i ? "," : "") + std::to_string(counts[i]);
        const auto cand = sacrificial_counts(p, pts.x1, n);
        a_example += ") ES " + format_number(count_objective(p, {counts})) + " vs best one-overload " +
                     format_number(count_objective(p, cand));
        a_example += ")";
      }
    }
  }

  // (b) all identical with n <= k x1: counts differ by at most one.
  int b_checked = 0, b_bad = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t k = 1 + seed % 4;
    auto probe = gen(6000 + seed, 1, 1, true, true, true, {0.5, 0.97});
    const double p = probe.prob(0, 0);
    const auto x1 = inflection_points(std::span<const double>(&p, 1)).x1[0];
    const std::size_t n = 1 + detail::mix64(seed) % (k * x1);
    const Instance inst(std::vector<double>(n, 1.0), k, std::vector<double>(n * k, p));
    const auto counts = solve_ioih_doh(inst).allocation.counts(k);
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    ++b_checked;
    if (*hi - *lo > 1) ++b_bad;
  }

  // (c) contiguous optimum inside the oracle's enumeration.
  int c_checked = 0, c_bad = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const bool ihv = seed % 2 == 0;
    const auto [n, k] = shape(7000 + seed, 8, 2, 3);
    const auto inst = gen(7000 + seed, n, k, ihv, !ihv, ihv);
    std::vector<std::size_t> pos(inst.n()), order(inst.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ihv ? inst.prob(0, a) > inst.prob(0, b) : inst.value(a) > inst.value(b);
    });
    for (std::size_t t = 0; t < order.size(); ++t) pos[order[t]] = t;
    const double best = brute_force(inst).es;
    bool found = false;
    enumerate_reports(inst, [&](const Allocation& a, double es) {
      if (found || es < best * (1 - 1e-9)) return;
      bool contiguous = true;
      for (std::uint32_t h = 0; h < inst.k() && contiguous; ++h) {
        std::size_t lo = inst.n(), hi = 0, cnt = 0;
        for (std::size_t j = 0; j < inst.n(); ++j) {
          if (a[j] != h) continue;
          lo = std::min(lo, pos[j]);
          hi = std::max(hi, pos[j]);
          ++cnt;
        }
        contiguous = cnt == 0 || hi - lo + 1 == cnt;
      }
      found = contiguous;
    });
    ++c_checked;
    if (!found) ++c_bad;
  }

  const bool ok = a_bad == 0 && b_bad == 0 && c_bad == 0;
  verdict(5, ok, "structural properties",
          "(a) one sacrificial handler " + std::to_string(a_checked - a_bad) + "/" + std::to_string(a_checked) +
              ", (b) even split " + std::to_string(b_checked - b_bad) + "/" + std::to_string(b_checked) +
              ", (c) contiguous optimum " + std::to_string(c_checked - c_bad) + "/" + std::to_string(c_checked));
  if (a_bad) note("(a) first counterexample: " + a_example);
}

void criterion6() {
  int yes = 0, no = 0, bad = 0;
  double min_margin = 1.0;
  std::size_t unrestricted = 0, equal_sum_only = 0;
  for (std::size_t n : {1u, 2u, 3u}) {
    // multisets of 3n elements from 1..8, non-decreasing
    std::vector<std::uint64_t> x(3 * n, 1);
    while (true) {
      std::uint64_t sum = 0;
      for (auto e : x) sum += e;
      if (sum % n == 0) {
        const auto tp = ThreePartitionInstance::from_elements(x);
        if (tp.strict_bounds()) {
          const bool feasible = three_partition_feasible(tp);
          const auto red = reduce_3p(tp);
          const double es = dp_exact(red.instance).es;
          const double r = red.params.threshold_r;
          if (feasible) {
            ++yes;
            if (es < r * (1 - 1e-9)) ++bad;
          } else {
            ++no;
            if (!(es < r)) ++bad;
            min_margin = std::min(min_margin, (r - es) / r);
          }
        } else {
          ++unrestricted;
          // Outside the B/4 < x < B/2 premise an equal-sum split need not use triples.
          const auto red = reduce_3p(tp);
          const double es = dp_exact(red.instance).es;
          if (es >= red.params.threshold_r * (1 - 1e-9) && !three_partition_feasible(tp)) ++equal_sum_only;
        }
      }
      // next multiset
      std::size_t i = x.size();
      while (i > 0 && x[i - 1] == 8) --i;
      if (i == 0) break;
      const auto v = x[i - 1] + 1;
      for (std::size_t t = i - 1; t < x.size(); ++t) x[t] = v;
    }
  }
  verdict(6, bad == 0, "3-Partition reduction: ES >= r iff yes-instance",
          std::to_string(yes) + " yes and " + std::to_string(no) + " no instances (3n<=9, x<=8, B/4<x<B/2), " +
              std::to_string(bad) + " violations, min no-side relative margin " + fmt("%.3e", min_margin));
  note(std::to_string(unrestricted) + " further multisets violate B/4<x<B/2; " + std::to_string(equal_sum_only) +
       " of them reach r through a non-triple equal-sum split");
}

void criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;  // default 9-cell grid, 50 trials, the five heuristics, GA 1000/1000/1000
  cfg.seed = 2024;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto table = run_experiment(cfg);
  double max_wall = 0.0;
  std::string slowest;
  for (const auto& r : table.records) {
    if (r.wall_ms > max_wall) {
      max_wall = r.wall_ms;
      slowest = r.solver + " n=" + std::to_string(r.n) + " k=" + std::to_string(r.k);
    }
  }
  std::map<std::pair<std::string, std::size_t>, std::vector<std::pair<std::size_t, double>>> by_n;
  std::map<std::string, double> big;
  for (const auto& c : table.cells) {
    by_n[{c.solver, c.n}].emplace_back(c.k, c.mean);
    if (c.n == 250 && c.k == 100) big[c.solver] = c.mean;
  }
  int trend_bad = 0;
  std::string trend_detail;
  for (const auto& solver : cfg.solvers) {
    for (std::size_t n : {25u, 50u, 250u}) {
      auto row = by_n[{solver, n}];
      std::sort(row.begin(), row.end());
      for (std::size_t i = 1; i < row.size(); ++i) {
        if (!(row[i].second > row[i - 1].second)) {
          ++trend_bad;
          trend_detail += " " + solver + "@n=" + std::to_string(n);
        }
      }
    }
  }
  int level_bad = 0;
  std::string levels;
  for (const char* s : {"o-mmr", "c-mmr", "dp-h", "hi-ga"}) {
    if (!(big[s] > 0.9)) ++level_bad;
    levels += std::string(levels.empty() ? "" : " ") + s + "=" + fmt("%.3f", big[s]);
  }
  const bool ok = max_wall < 60000.0 && trend_bad == 0 && level_bad == 0;
  verdict(7, ok, "heuristics at benchmark scale",
          std::to_string(table.records.size()) + " solves, slowest " + fmt("%.1f", max_wall / 1000) + " s (" +
              slowest + ", limit 60 s), " + std::to_string(trend_bad) + " non-increasing k steps" + trend_detail +
              ", n=250 k=100 mean ratios " + levels + " (need > 0.9), total " + fmt("%.0f", seconds_since(t0)) +
              " s on " + std::to_string(cfg.threads) + " thread(s)");
  std::istringstream lines(format_table(table));
  for (std::string line; std::getline(lines, line);) note(line);
}

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(DOH_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, p)) out.append(buf, got);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void criterion8() {
  const fs::path dir = fs::temp_directory_path() / ("doh_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto path = [&](const char* name) { return (dir / name).string(); };

  save_instance(gen(81, 9, 3), path("general.json"));
  save_instance(gen(82, 10, 3, true, true, false), path("io.json"));
  save_instance(gen(83, 10, 3, true, false, true), path("ihv.json"));
  save_instance(gen(84, 10, 3, false, true, false), path("ir.json"));
  save_instance(gen(85, 10, 3, true, true, true), path("ioih.json"));
  save_instance(gen(86, 40, 4), path("large.json"));
  std::ofstream(path("tp.json")) << R"({"x":[1,2,3,2,2,2]})";

  std::vector<std::string> commands;
  for (auto m : kMethods) {
    std::string file = "general.json";
    if (m == "io" || m == "ihv" || m == "ir" || m == "ioih") file = std::string(m) + ".json";
    commands.push_back("solve " + path(file.c_str()) + " --method " + std::string(m) + " --seed 5");
  }
  commands.push_back("solve " + path("large.json") + " --method auto --seed 9");  // hi-ga fallback
  commands.push_back("gen -n 25 -k 5 --seed 7 -o -");
  commands.push_back("gen -n 12 -k 3 --seed 7 --row-constant --identical-values -o -");
  commands.push_back("gen --from-3p " + path("tp.json") + " -o -");
  commands.push_back("bench --grid 10x2,12x3 --trials 3 --seed 4 --pop 50 --gens 20 --couples 50 --out -");

  int bad = 0, runs = 0;
  std::string first_bad;
  for (const auto& c : commands) {
    std::string reference;
    bool reference_set = false;
    for (const char* threads : {" --threads 1", " --threads 2", " --threads 4"}) {
      const bool takes_threads = c.rfind("solve", 0) == 0 || c.rfind("bench", 0) == 0;
      const auto r = run_cli(c + (takes_threads ? threads : ""));
      ++runs;
      if (r.code != 0 || r.out.empty()) {
        ++bad;
        if (first_bad.empty()) first_bad = c + " exited " + std::to_string(r.code);
        continue;
      }
      if (!reference_set) {
        reference = r.out;
        reference_set = true;
      } else if (r.out != reference) {
        ++bad;
        if (first_bad.empty()) first_bad = c;
      }
    }
  }
  fs::remove_all(dir);
  verdict(8, bad == 0, "byte-identical reruns",
          std::to_string(commands.size()) + " commands (16 methods, gen, gen --from-3p, bench) x 3 runs with --threads 1/2/4, " +
              std::to_string(runs) + " runs, " + std::to_string(bad) + " differing" +
              (first_bad.empty() ? "" : " (first: " + first_bad + ")"));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      verdict(static_cast<int>(i + 1), false, "criterion " + std::to_string(i + 1), std::string("threw: ") + e.what());
    }
  }
  return failures;
}
