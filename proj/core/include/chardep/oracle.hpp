#ifndef CHARDEP_ORACLE_HPP
#define CHARDEP_ORACLE_HPP

#include <vector>

#include "chardep/chart.hpp"
#include "chardep/types.hpp"

namespace chardep {

// Ground truth by exhaustion; independent of the chart implementations.
namespace oracle {

inline constexpr int kMaxN = 9;

// All head arrays of projective trees over 1..n with a single ROOT
// attachment, duplicate-free, enumerated by recursive span splitting.
std::vector<std::vector<Index>> enumerate_projective(int n);

// Structural checkers used for filtering and for the constraint ablations.
// Every word has exactly one character whose head lies outside the word.
bool single_root_ok(const std::vector<Index>& head, const ForestSpec& spec);
// Every head of a cross-word arc is itself externally headed.
bool root_as_head_ok(const std::vector<Index>& head, const ForestSpec& spec);
// Full compatibility: both checkers plus, when the spec carries word-level
// heads, inter arcs running root-to-root along them; narrowed words must
// match their pinned structure.
bool compatible_with(const std::vector<Index>& head, const ForestSpec& spec);

std::vector<std::vector<Index>> filter_compatible(
    const std::vector<std::vector<Index>>& trees, const ForestSpec& spec);

// Log-sum-exp of canonical tree scores; trees touching a masked arc count
// as zero. Throws on an empty list.
double brute_logZ(const std::vector<std::vector<Index>>& trees,
                  const ArcScores& scores);

struct BruteMax {
  double score = kMaskedScore;
  std::vector<Index> head;
};
BruteMax brute_argmax(const std::vector<std::vector<Index>>& trees,
                      const ArcScores& scores);

// Posterior arc frequencies by enumeration.
ArcScores brute_marginals(const std::vector<std::vector<Index>>& trees,
                          const ArcScores& scores);

// Coarse-to-fine legality of a (tree, role tagging) pair: ROOT arcs are
// inter, everything under an intra arc is intra, and (when excluding the
// Comb(WI,WE->WE) rule) inter-arc heads have no intra parent.
bool c2f_legal(const std::vector<Index>& head, const std::vector<ArcRole>& role,
               bool exclude_root_as_head);

struct BruteC2f {
  double score = kMaskedScore;
  std::vector<Index> head;
  std::vector<ArcRole> role;
  long derivations = 0;
  double log_z = kMaskedScore;
};
// Exhaustive search over (tree, tagging) pairs respecting the rule set.
BruteC2f brute_c2f(const std::vector<std::vector<Index>>& trees,
                   const C2fArcScores& scores, bool exclude_root_as_head);

}  // namespace oracle
}  // namespace chardep

#endif  // CHARDEP_ORACLE_HPP
