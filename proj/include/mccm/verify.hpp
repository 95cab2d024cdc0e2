#ifndef MCCM_VERIFY_HPP
#define MCCM_VERIFY_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mccm {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
  double budget_seconds = 0;
};

struct VerifyOptions {
  std::uint64_t seed = 20240817;
  std::filesystem::path out_dir;  // empty: no files written
  bool with_reproducibility = true;
  int threads = 4;  // thread count for the main pipeline run
};

// Runs the full verification suite. Results come back in criterion order;
// when out_dir is set, stats.csv / sweep.csv / sample dumps / report.csv and
// a manifest land there.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt);

// Statistics pipeline behind the suite: computes every criterion statistic
// deterministically from the seed and returns the digest map of the files it
// wrote. Used directly by the reproducibility criterion.
std::map<std::string, std::string> run_stats_pipeline(std::uint64_t seed,
                                                      const std::filesystem::path& out_dir,
                                                      std::vector<CriterionResult>* results);

}  // namespace mccm

#endif
