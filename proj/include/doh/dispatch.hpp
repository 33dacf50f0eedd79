// Name-based solver selection shared by the CLI and the benchmark harness.
#pragma once

#include <array>
#include <stdexcept>

#include "doh/approx.hpp"
#include "doh/exact_dp.hpp"
#include "doh/heuristics.hpp"
#include "doh/oracle.hpp"
#include "doh/special.hpp"

namespace doh {

inline constexpr std::array<std::string_view, 16> kMethods = {
    "auto", "brute", "dp", "fptas", "subset", "io", "ihv", "ir",
    "ioih", "eo", "mmr", "o-mmr", "c-mmr", "dp-h", "ri-ga", "hi-ga"};

struct SolverOptions {
  double epsilon = 0.1;
  std::size_t subset_c = 2;
  std::uint64_t seed = 1;
  std::size_t population = 1000;
  std::size_t generations = 1000;
  std::size_t couples = 1000;
  double mutation_rate = 0.01;
  /// `auto` runs the exact DP only when k^n is at most this.
  double dp_cap = 1e6;
  std::size_t state_cap = 10'000'000;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;

  GaConfig ga(GaVariant variant) const {
    GaConfig c = variant == GaVariant::RandomInheritance ? GaConfig::ri_ga(seed) : GaConfig::hi_ga(seed);
    c.population = population;
    c.generations = generations;
    c.couples_per_generation = couples;
    c.mutation_rate = mutation_rate;
    return c;
  }
};

inline bool is_method(std::string_view name) {
  return std::find(kMethods.begin(), kMethods.end(), name) != kMethods.end();
}

/// Method `auto` resolves to: the class's special solver, else dp when
/// k^n <= dp_cap, else hi-ga.
inline std::string resolve_auto(const Instance& inst, const SolverOptions& opt) {
  switch (classify(inst)) {
    case InstanceClass::AllIdentical: return "ioih";
    case InstanceClass::IdenticalObjects: return "io";
    case InstanceClass::IdenticalHandlersValues: return "ihv";
    case InstanceClass::IdenticalRisks: return "ir";
    default: break;
  }
  const double space = std::pow(static_cast<double>(inst.k()), static_cast<double>(inst.n()));
  return space <= opt.dp_cap ? "dp" : "hi-ga";
}

/// Throws std::invalid_argument for an unknown method name.
inline SolveReport solve_by_name(const Instance& inst, std::string_view method, const SolverOptions& opt = {}) {
  if (method == "auto") {
    auto r = solve_by_name(inst, resolve_auto(inst, opt), opt);
    r.meta["dispatch"] = "auto";
    return r;
  }
  if (method == "brute") return brute_force(inst, opt.enumeration_cap);
  if (method == "dp") {
    DpOptions d;
    d.state_cap = opt.state_cap;
    return dp_exact(inst, d);
  }
  if (method == "fptas") return fptas(inst, opt.epsilon, {opt.state_cap});
  if (method == "subset") return subset_approx(inst, opt.subset_c, opt.epsilon, {opt.state_cap});
  if (method == "io") return solve_io_doh(inst);
  if (method == "ihv") return solve_ihv_doh(inst);
  if (method == "ir") return solve_ir_doh(inst);
  if (method == "ioih") return solve_ioih_doh(inst);
  if (method == "eo") return solve_eo_doh(inst);
  if (method == "mmr") return mmr(inst, MmrVariant::Plain);
  if (method == "o-mmr") return mmr(inst, MmrVariant::Ordered);
  if (method == "c-mmr") return mmr(inst, MmrVariant::Clairvoyant);
  if (method == "dp-h") return dp_h(inst);
  if (method == "ri-ga") return genetic(inst, opt.ga(GaVariant::RandomInheritance));
  if (method == "hi-ga") return genetic(inst, opt.ga(GaVariant::HeuristicInitialized));
  throw std::invalid_argument("unknown method '" + std::string(method) + "'");
}

}  // namespace doh
