#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace symld::cli {

struct CriterionResult {
  std::string suite;
  std::string id;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

// Runs the named verification suite (oracle | coupling | rate | bridge | all)
// with the given seed. inject_fault flips one table count inside the oracle
// comparison; a correct build must then report a failure (negative control).
std::vector<CriterionResult> verify_suite(const std::string& suite, std::uint64_t seed,
                                          bool inject_fault = false);

// Canonical report rendering; byte-identical across runs with the same seed.
std::string report_csv(const std::vector<CriterionResult>& rows);
std::string report_json(const std::vector<CriterionResult>& rows);

}  // namespace symld::cli
