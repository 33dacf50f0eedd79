// Solves every sample instance with the exact DP and a few heuristics.
//   doh_samples [samples-dir]
#include <filesystem>
#include <iostream>

#include "doh/doh.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? argv[1] : fs::path(__FILE__).parent_path();
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.path().extension() == ".json" && name.rfind("three_partition", 0) != 0) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& f : files) {
    const auto inst = doh::load_instance(f.string());
    std::cout << f.filename().string() << "  n=" << inst.n() << " k=" << inst.k()
              << "  class=" << doh::to_string(doh::classify(inst)) << '\n';
    for (const char* m : {"auto", "dp", "o-mmr", "c-mmr", "dp-h"}) {
      const auto r = doh::solve_by_name(inst, m);
      std::printf("  %-6s %-10s ES=%.6f\n", m, r.solver_name.c_str(), r.es);
    }
  }

  // 3-Partition reduction: the optimum reaches r only on the yes-instance.
  for (const char* name : {"three_partition_yes.json", "three_partition_no.json"}) {
    const auto tp = doh::load_three_partition((dir / name).string());
    const auto red = doh::reduce_3p(tp);
    const auto r = doh::dp_exact(red.instance);
    std::printf("%s  b=%g  r=%.9f  OPT=%.9f  %s\n", name, red.params.base_b, red.params.threshold_r, r.es,
                r.es >= red.params.threshold_r * (1 - 1e-9) ? "reaches r" : "below r");
  }
  return 0;
}
