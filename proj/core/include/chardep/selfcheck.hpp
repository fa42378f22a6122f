#ifndef CHARDEP_SELFCHECK_HPP
#define CHARDEP_SELFCHECK_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "chardep/oracle.hpp"
#include "chardep/types.hpp"

namespace chardep {

// Random instance generators shared by the self-check suite and the tests.
namespace testgen {

Segmentation random_segmentation(int n, std::mt19937_64& rng, int max_word_len = 3);
std::vector<Index> random_projective_heads(int n, std::mt19937_64& rng);
ForestSpec random_forest_spec(int n, std::mt19937_64& rng);
ArcScores random_scores(int n, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0);
C2fArcScores random_c2f_scores(int n, std::mt19937_64& rng, double lo = -2.0,
                               double hi = 2.0);

}  // namespace testgen

struct SelfCheckOptions {
  int max_n = 8;
  int seeds_per_n = 100;        // random instances per sentence length
  int fd_instances_per_n = 10;  // finite-difference marginal checks
  std::uint64_t base_seed = 20240901;
  // Fault injection for exercising the failure path: flips the sign of
  // s(0,1) on the chart side only, so oracle agreement must break.
  bool inject_inside_fault = false;
};

struct SelfCheckReport {
  bool ok = true;
  std::vector<std::string> lines;  // one summary line per sub-check
  std::string counterexample;      // dump of the first disagreement
};

// Oracle agreement suite: inside vs brute log-sum-exp, constrained inside
// vs the filtered compatible set (values and counts), decoder score
// equality, and marginals against enumeration frequencies and central
// finite differences.
SelfCheckReport run_selfcheck(const SelfCheckOptions& opts);

}  // namespace chardep

#endif  // CHARDEP_SELFCHECK_HPP
