// Acceptance suite: runs every verification criterion at its stated
// tolerance and prints one pass/fail line per criterion.

#include <cstdio>
#include <cstring>

#include "tw/suite.hpp"

int main(int argc, char** argv) {
  tw::SuiteConfig cfg;
  cfg.params = tw::GridParams{0.5, 2, -8, 0};
  cfg.seed = 20240811ULL;
  cfg.n_instances = 200;
  cfg.max_atoms = 64;
  cfg.n_shift = 8;
  cfg.pbad_trials = 10000;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      cfg.n_instances = 24;
      cfg.pbad_trials = 2000;
    }
  }

  const auto results = tw::acceptance_criteria(cfg);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%s %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.pass) all = false;
  }
  std::printf("%s\n", all ? "ACCEPTANCE: all criteria passed"
                          : "ACCEPTANCE: at least one criterion failed");
  return all ? 0 : 1;
}
