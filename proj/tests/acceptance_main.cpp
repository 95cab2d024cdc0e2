// Acceptance gate: runs every verification criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero on any failure.

#include <malloc.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "mccm/io.hpp"
#include "mccm/verify.hpp"

int main(int argc, char** argv) {
  // multi-megabyte field buffers churn mmap/munmap otherwise; keep them on the heap
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, -1);
  mccm::VerifyOptions opt;
  opt.out_dir = "acceptance_out";
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc)
      opt.seed = std::strtoull(argv[++i], nullptr, 10);
    else if (std::strcmp(argv[i], "--skip-repro") == 0)
      opt.with_reproducibility = false;
    else if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc)
      opt.out_dir = argv[++i];
  }
  const auto results = mccm::run_acceptance(opt);
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] criterion %2d: %-40s %s (%.1f s)\n", r.pass ? "pass" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str(), r.seconds);
    all = all && r.pass;
  }
  std::printf("%s\n", all ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES PRESENT");
  return all ? 0 : 1;
}
