// doh: command-line front end (solve, gen, bench, classify).
//
// Exit codes: 0 ok, 2 usage, 3 validation or class mismatch, 4 size cap,
// 5 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "doh/doh.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 2, kValidation = 3, kSize = 4, kInternal = 5 };

std::vector<std::pair<std::size_t, std::size_t>> parse_grid(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto x = cell.find('x');
    if (x == std::string::npos) throw std::invalid_argument("grid cell '" + cell + "': expected NxK");
    try {
      std::size_t used = 0;
      const auto n = std::stoul(cell.substr(0, x), &used);
      if (used != x) throw std::invalid_argument(cell);
      const auto rest = cell.substr(x + 1);
      const auto k = std::stoul(rest, &used);
      if (used != rest.size() || n == 0 || k == 0) throw std::invalid_argument(cell);
      grid.emplace_back(n, k);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("grid cell '" + cell + "': expected NxK with positive integers");
    }
  }
  if (grid.empty()) throw std::invalid_argument("grid: no cells given");
  return grid;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    doh::detail::write_text_file(path, text);
  }
}

void add_solver_flags(CLI::App* cmd, doh::SolverOptions& opt) {
  cmd->add_option("--epsilon", opt.epsilon, "Approximation parameter for fptas and subset, in (0,1)")
      ->capture_default_str();
  cmd->add_option("--subset-c", opt.subset_c, "Handler subset size for subset (2 <= c <= k)")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "Seed for the genetic algorithms")->capture_default_str();
  cmd->add_option("--pop", opt.population, "GA population size")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--gens", opt.generations, "GA generations")->capture_default_str();
  cmd->add_option("--couples", opt.couples, "GA couples per generation")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mutation-rate", opt.mutation_rate, "GA per-chromosome mutation probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--dp-cap", opt.dp_cap, "auto uses the exact DP only when k^n is at most this")
      ->capture_default_str();
  cmd->add_option("--state-cap", opt.state_cap, "Abort dp/fptas when a layer would exceed this many states")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers for the destructive object handling allocation problem"};
  app.require_subcommand(1);

  // solve
  doh::SolverOptions solve_opt;
  std::string solve_path, method = "auto";
  bool solve_timing = false;
  std::size_t solve_threads = 1;
  auto* solve = app.add_subcommand("solve", "Solve an instance and print the report JSON");
  solve->add_option("instance", solve_path, "Instance JSON file")->required();
  std::vector<std::string> methods(doh::kMethods.begin(), doh::kMethods.end());
  solve->add_option("-m,--method", method, "Solver")->capture_default_str()->check(CLI::IsMember(methods));
  add_solver_flags(solve, solve_opt);
  solve->add_flag("--timing", solve_timing, "Include wall_ms in the report");
  solve->add_option("--threads", solve_threads, "Worker cap (solvers are single-threaded)")
      ->check(CLI::PositiveNumber);

  // gen
  doh::GenSpec spec;
  std::string gen_out, from_3p;
  double base = 0.0;
  auto* gen = app.add_subcommand("gen", "Write a random or 3-Partition instance");
  gen->add_option("-n", spec.n, "Objects")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("-k", spec.k, "Handlers")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();
  gen->add_option("--v-lo", spec.value.lo, "Lower value bound")->capture_default_str();
  gen->add_option("--v-hi", spec.value.hi, "Upper value bound")->capture_default_str();
  gen->add_option("--p-lo", spec.prob.lo, "Lower probability bound")->capture_default_str();
  gen->add_option("--p-hi", spec.prob.hi, "Upper probability bound")->capture_default_str();
  gen->add_flag("--identical-values", spec.identical_values, "One value for every object");
  gen->add_flag("--row-constant", spec.row_constant, "p_ij depends on the handler only");
  gen->add_flag("--column-constant", spec.column_constant, "p_ij depends on the object only");
  gen->add_option("--from-3p", from_3p, "3-Partition file {\"x\": [...]} to reduce instead");
  gen->add_option("--base", base, "Base b in (1, e^{4/(nB)}) for --from-3p (default: rounded midpoint)");
  gen->add_option("-o,--out", gen_out, "Output instance file ('-' for standard output)")->required();

  // bench
  doh::ExperimentConfig bench_cfg;
  std::string grid_text, solvers_text, csv_out, json_out;
  bool bench_timing = false;
  auto* bench = app.add_subcommand("bench", "Run the seeded heuristic experiment and print the mu/sigma table");
  bench->add_option("--grid", grid_text, "Cells as NxK,NxK,... (default: 25x5,25x10,50x10,50x25,100x25,100x50,250x25,250x50,250x100)");
  bench->add_option("--solvers", solvers_text, "Comma-separated methods (default: o-mmr,c-mmr,dp-h,ri-ga,hi-ga)");
  bench->add_option("--trials", bench_cfg.trials, "Trials per cell")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_cfg.seed, "Master seed")->capture_default_str();
  bench->add_option("--threads", bench_cfg.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--out", csv_out, "Per-trial CSV file");
  bench->add_option("--json", json_out, "Summary JSON file");
  bench->add_flag("--timing", bench_timing, "Fill wall_ms in the CSV and JSON");
  bench->add_option("--pop", bench_cfg.solver.population, "GA population size")->capture_default_str();
  bench->add_option("--gens", bench_cfg.solver.generations, "GA generations")->capture_default_str();
  bench->add_option("--couples", bench_cfg.solver.couples, "GA couples per generation")->capture_default_str();
  bench->add_option("--mutation-rate", bench_cfg.solver.mutation_rate, "GA mutation probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  // classify
  std::string classify_path;
  auto* cls = app.add_subcommand("classify", "Print the structural class of an instance");
  cls->add_option("instance", classify_path, "Instance JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*solve) {
      const auto inst = doh::load_instance(solve_path);
      const auto report = doh::solve_by_name(inst, method, solve_opt);
      std::cout << doh::to_json(report, {solve_timing}).dump(2) << '\n';
    } else if (*gen) {
      if (!from_3p.empty()) {
        const auto tp = doh::load_three_partition(from_3p);
        const auto red = base > 0.0 ? doh::reduce_3p(tp, base) : doh::reduce_3p(tp);
        write_or_print(gen_out, doh::to_json(red.instance).dump() + "\n");
        const doh::Json info{{"base_b", red.params.base_b},
                             {"threshold_r", doh::detail::round_sig12(red.params.threshold_r)}};
        (gen_out == "-" ? std::cerr : std::cout) << info.dump() << '\n';
      } else {
        write_or_print(gen_out, doh::to_json(doh::gen_random(spec)).dump() + "\n");
      }
    } else if (*bench) {
      if (!grid_text.empty()) bench_cfg.grid = parse_grid(grid_text);
      if (!solvers_text.empty()) {
        bench_cfg.solvers.clear();
        std::stringstream ss(solvers_text);
        for (std::string s; std::getline(ss, s, ',');) bench_cfg.solvers.push_back(s);
      }
      const auto table = doh::run_experiment(bench_cfg);
      if (!csv_out.empty()) write_or_print(csv_out, doh::to_csv(table, bench_timing));
      if (!json_out.empty()) write_or_print(json_out, doh::to_json(table, bench_timing).dump(2) + "\n");
      std::cout << doh::format_table(table);
    } else if (*cls) {
      const auto inst = doh::load_instance(classify_path);
      std::cout << doh::Json{{"class", std::string(doh::to_string(doh::classify(inst)))},
                             {"n", inst.n()},
                             {"k", inst.k()}}
                       .dump()
                << '\n';
    }
  } catch (const doh::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const doh::SizeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSize;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
