// Acceptance battery runner: one pass/fail line per criterion, nonzero exit
// on any failure. Used both by ctest and directly.

#include <cstdio>
#include <cstring>
#include <string>

#include "varilab/suite.hpp"

int main(int argc, char** argv) {
  varilab::SuiteOptions opt;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0)
      opt.quick = true;
    else if (std::strcmp(argv[i], "--filter") == 0 && i + 1 < argc)
      opt.filter = argv[++i];
    else {
      std::fprintf(stderr, "usage: %s [--quick] [--filter substr]\n", argv[0]);
      return 2;
    }
  }
  auto results = varilab::run_acceptance_suite(opt);
  bool all = true;
  double total = 0.0;
  for (const auto& r : results) {
    std::printf("[%s] %2d %-28s (%.1fs)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds);
    std::fputs(r.detail.c_str(), stdout);
    all = all && r.pass;
    total += r.seconds;
  }
  std::printf("%s: %zu criteria in %.1fs\n", all ? "ALL PASS" : "FAILURES", results.size(),
              total);
  return all ? 0 : 1;
}
