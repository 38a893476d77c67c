// Acceptance harness: runs every criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero on any failure.

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "gpe/acceptance.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 20240808;
  bool verbose = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc)
      seed = std::strtoull(argv[++i], nullptr, 10);
    else if (std::strcmp(argv[i], "--verbose") == 0)
      verbose = true;
  }

  std::printf("acceptance suite (seed %llu)\n",
              static_cast<unsigned long long>(seed));
  std::fflush(stdout);

  auto full = gpe::acceptance::run_with_determinism(seed);

  auto print_criterion = [&](const gpe::acceptance::CriterionResult& c) {
    std::printf("[%s] criterion %2d: %s (%.1fs)\n",
                c.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), c.seconds);
    if (verbose || !c.passed)
      for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
  };
  for (const auto& c : full.first.criteria) print_criterion(c);
  print_criterion(full.determinism);

  std::printf("%s\n", full.all_passed ? "ALL CRITERIA PASSED"
                                      : "SOME CRITERIA FAILED");
  return full.all_passed ? 0 : 1;
}
