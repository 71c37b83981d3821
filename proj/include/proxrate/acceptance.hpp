#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace proxrate {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // one-line summary of the measured quantities
};

// Runs the full acceptance suite (canonical random Lasso family, seeds 0-9,
// plus the synthetic deblurring run), writing one PASS/FAIL line per
// criterion to `log`. `threads` caps the per-seed worker pool; <= 0 picks
// hardware concurrency.
std::vector<CriterionResult> run_acceptance(std::ostream& log, int threads);

}  // namespace proxrate
