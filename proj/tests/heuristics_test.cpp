#include <sstream>

#include "test_util.hpp"

using namespace doh;

namespace {

GaConfig small_ga(GaVariant v, std::uint64_t seed) {
  GaConfig c = v == GaVariant::RandomInheritance ? GaConfig::ri_ga(seed) : GaConfig::hi_ga(seed);
  c.population = 40;
  c.generations = 30;
  c.couples_per_generation = 40;
  return c;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_trace(const std::string& s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::stringstream ss(s);
  for (std::string step; std::getline(ss, step, ',');) {
    const auto colon = step.find(':');
    out.emplace_back(std::stoul(step.substr(0, colon)), std::stoul(step.substr(colon + 1)));
  }
  return out;
}

}  // namespace

TEST(Mmr, OrderedTwoByTwo) {
  const auto r = mmr(doh::testing::two_by_two(), MmrVariant::Ordered);
  EXPECT_DOUBLE_EQ(r.es, 3.2);
  EXPECT_EQ(r.meta.at("step_trace"), "1:1,2:2");
}

TEST(Mmr, CertainSurvivalKeepsEverything) {
  const auto inst = doh::testing::make({4, 1, 2}, {{1, 1, 1}, {1, 1, 1}});
  for (auto v : {MmrVariant::Plain, MmrVariant::Ordered, MmrVariant::Clairvoyant}) {
    EXPECT_DOUBLE_EQ(mmr(inst, v).es, 7.0);
  }
  EXPECT_DOUBLE_EQ(dp_h(inst).es, 7.0);
  EXPECT_DOUBLE_EQ(genetic(inst, small_ga(GaVariant::HeuristicInitialized, 1)).es, 7.0);
}

TEST(Mmr, EveryStepTakesTheLargestDelta) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = doh::testing::random_small(seed, 30, 5);
    for (auto variant : {MmrVariant::Plain, MmrVariant::Ordered, MmrVariant::Clairvoyant}) {
      const auto r = mmr(inst, variant);
      std::vector<std::uint32_t> partial(inst.n(), Allocation::kUnassigned);
      for (auto [obj, label] : parse_trace(r.meta.at("step_trace"))) {
        const std::size_t j = obj - 1;
        const double before = evaluate(inst, Allocation(partial)).total;
        double best = -1e300;
        for (std::uint32_t h = 0; h < inst.k(); ++h) {
          auto trial = partial;
          trial[j] = h;
          best = std::max(best, evaluate(inst, Allocation(trial)).total - before);
        }
        if (label == 0) {
          ASSERT_EQ(variant, MmrVariant::Clairvoyant);
          ASSERT_LT(best, 0.0);
          continue;
        }
        partial[j] = static_cast<std::uint32_t>(label - 1);
        const double chosen = evaluate(inst, Allocation(partial)).total - before;
        ASSERT_NEAR(chosen, best, 1e-9 * std::max(1.0, std::fabs(best))) << seed;
        if (variant == MmrVariant::Clairvoyant) ASSERT_GE(chosen, 0.0);
      }
      EXPECT_TRUE(r.allocation.is_total());
    }
  }
}

TEST(Mmr, ClairvoyantDumpsLosingObjectsTogether) {
  // Once both handlers carry a heavy object, adding a risky one loses value.
  const auto inst = doh::testing::make({10, 10, 1, 1}, {{0.95, 0.9, 0.2, 0.2}, {0.9, 0.95, 0.2, 0.2}});
  const auto r = mmr(inst, MmrVariant::Clairvoyant);
  EXPECT_EQ(r.meta.at("dumpster_size"), "2");
  EXPECT_EQ(r.allocation[2], r.allocation[3]);
  EXPECT_TRUE(r.allocation.is_total());
}

TEST(DpH, BlocksPerDimension) {
  EXPECT_EQ(dp_h_blocks(1, 3), 1u);
  EXPECT_EQ(dp_h_blocks(9, 2), 3u);
  EXPECT_EQ(dp_h_blocks(10, 2), 4u);
  EXPECT_EQ(dp_h_blocks(250, 100), 2u);
}

TEST(DpH, TwoByTwo) { EXPECT_DOUBLE_EQ(dp_h(doh::testing::two_by_two()).es, 3.2); }

TEST(DpH, UsuallyCloseToOracle) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = doh::testing::random_small(seed, 8, 2, 2);
    const auto r = dp_h(inst);
    const double oracle = brute_force(inst).es;
    ASSERT_LE(r.es, oracle * (1 + 1e-12));
    if (r.es >= 0.8 * oracle) ++good;
  }
  EXPECT_GE(good, 180);
}

TEST(Genetic, DegenerateRunReturnsItsSeed) {
  const auto inst = doh::testing::random_instance(3, 20, 4);
  GaConfig c;
  c.population = 1;
  c.generations = 0;
  c.seeding_mix = {0, 1, 0, 0};
  EXPECT_EQ(genetic(inst, c).allocation, mmr(inst, MmrVariant::Ordered).allocation);
}

TEST(Genetic, FindsTheOptimumOfATinySpace) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    EXPECT_DOUBLE_EQ(genetic(doh::testing::two_by_two(), GaConfig::ri_ga(seed)).es, 3.2);
    EXPECT_DOUBLE_EQ(genetic(doh::testing::two_by_two(), GaConfig::hi_ga(seed)).es, 3.2);
  }
}

TEST(Genetic, SameSeedSameResult) {
  const auto inst = doh::testing::random_instance(8, 30, 5);
  for (auto v : {GaVariant::RandomInheritance, GaVariant::HeuristicInitialized}) {
    const auto a = genetic(inst, small_ga(v, 11));
    const auto b = genetic(inst, small_ga(v, 11));
    EXPECT_EQ(a.allocation, b.allocation);
    EXPECT_EQ(a.meta, b.meta);
  }
}

TEST(Genetic, BestFitnessNeverDecreases) {
  const auto inst = doh::testing::random_instance(2, 40, 6);
  const auto r = genetic(inst, small_ga(GaVariant::RandomInheritance, 5));
  double last = -1.0;
  int last_gen = -1;
  for (auto [gen, es] : [&] {
         std::vector<std::pair<int, double>> out;
         std::stringstream ss(r.meta.at("best_trace"));
         for (std::string s; std::getline(ss, s, ',');) {
           const auto c = s.find(':');
           out.emplace_back(std::stoi(s.substr(0, c)), std::stod(s.substr(c + 1)));
         }
         return out;
       }()) {
    EXPECT_GT(gen, last_gen);
    EXPECT_GT(es, last);
    last = es;
    last_gen = gen;
  }
  EXPECT_NEAR(last, r.es, 1e-9 * r.es);
}

TEST(Genetic, RejectsBadConfig) {
  const auto inst = doh::testing::two_by_two();
  GaConfig c;
  c.population = 0;
  EXPECT_THROW(genetic(inst, c), ValidationError);
  c = GaConfig{};
  c.seeding_mix = {0.5, 0.1, 0, 0};
  EXPECT_THROW(genetic(inst, c), ValidationError);
}

TEST(Heuristics, NeverBeatTheExactSolvers) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    GenSpec s;
    s.n = 12;
    s.k = 3;
    s.seed = seed;
    s.row_constant = true;
    const auto inst = gen_random(s);
    const double exact = solve_ir_doh(inst).es;
    for (const char* m : {"mmr", "o-mmr", "c-mmr", "dp-h"}) {
      EXPECT_LE(solve_by_name(inst, m).es, exact * (1 + 1e-12)) << m;
    }
    EXPECT_LE(genetic(inst, small_ga(GaVariant::HeuristicInitialized, seed)).es, exact * (1 + 1e-12));
  }
}
