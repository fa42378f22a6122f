#ifndef CHARDEP_CHART_HPP
#define CHARDEP_CHART_HPP

#include <vector>

#include "chardep/types.hpp"

namespace chardep {

// Ablation switches for the two structural constraints. Both on by default;
// arc-level admissibility masks are always applied by the callers.
struct ConstraintFlags {
  bool single_root = true;   // inter-word complete spans end at word boundaries
  bool root_as_head = true;  // no intra incomplete + beyond-word complete combine
};

// Max-scoring projective tree over all trees with a single ROOT attachment.
// Throws NoValidTreeError when masking leaves no constructible tree.
std::vector<Index> eisner_decode(const ArcScores& scores);

// Max-scoring tree among exactly the trees compatible with the spec.
std::vector<Index> constrained_eisner(const ArcScores& scores,
                                      const ForestSpec& spec,
                                      ConstraintFlags flags = {});

// log Z(x): log-sum-exp of tree scores over all projective trees.
double inside(const ArcScores& scores);

// log Z(x, F) over the compatible forest.
double constrained_inside(const ArcScores& scores, const ForestSpec& spec,
                          ConstraintFlags flags = {});

// Posterior probability that arc h -> m appears in a tree drawn from the
// (constrained) distribution; spec == nullptr means unconstrained. Entries
// for inadmissible arcs are exactly 0.
ArcScores arc_marginals(const ArcScores& scores, const ForestSpec* spec = nullptr,
                        ConstraintFlags flags = {});

enum class ArcRole : unsigned char { kIntra, kInter };

struct C2fTree {
  std::vector<Index> head;    // size n+1, head[0] = -1
  std::vector<ArcRole> role;  // per modifier; ROOT arcs are always kInter
};

// Coarse-to-fine decode: intra-word spans are built before inter-word spans,
// each arc is tagged by the score table that produced it. With
// exclude_root_as_head (default) the Comb(WI,WE->WE) rule is dropped so only
// intra-structure roots head inter-word arcs.
C2fTree c2f_eisner(const C2fArcScores& scores, bool exclude_root_as_head = true);

// Sum-product counterpart over the same derivation space.
double c2f_inside(const C2fArcScores& scores, bool exclude_root_as_head = true);

// Posterior probability of arc h -> m carrying each role in a derivation
// drawn from the coarse-to-fine distribution; the adjoint of c2f_inside.
struct C2fMarginals {
  ArcScores intra;
  ArcScores inter;
};
C2fMarginals c2f_arc_marginals(const C2fArcScores& scores,
                               bool exclude_root_as_head = true);

// Gold-segmentation role routing: admissible intra arcs take the intra score,
// everything else (inter and ROOT arcs) the inter score; inadmissible arcs
// are masked.
ArcScores merge_c2f_scores(const C2fArcScores& scores, const ForestSpec& spec);

// Sum of arc scores of a head array, in ascending modifier order. The
// canonical tree score used when comparing decoders against oracles.
double tree_score(const std::vector<Index>& head, const ArcScores& scores);

}  // namespace chardep

#endif  // CHARDEP_CHART_HPP
