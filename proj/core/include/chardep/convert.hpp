#ifndef CHARDEP_CONVERT_HPP
#define CHARDEP_CONVERT_HPP

#include <map>

#include "chardep/types.hpp"

namespace chardep {

// Interprets a gold word-level tree as the forest of compatible
// character-level trees.
ForestSpec word_tree_to_forest(const WordTree& gold);

// Collapses maximal INTRA-arc subtrees into words and revives inter-word
// arcs at word level. Throws IllegalStructureError (with the offending
// arcs) when an INTRA component is non-contiguous, an INTRA arc spans a
// non-INTRA arc, or the ROOT arc is labeled INTRA.
WordTree recover_word_tree(const CharTree& tree);

// Total recovery: offending INTRA arcs are relabeled to their best
// non-INTRA label (argmax over syntactic labels when scores are given,
// else fallback_label), outermost first, until recovery succeeds.
WordTree recover_with_fallback(const CharTree& tree,
                               const LabelScores* scores = nullptr,
                               int fallback_label = 1);

enum class PseudoDirection { kLeftward, kRightward };

// Deterministic chain structure over a word span: leftward roots the last
// character (arcs i+1 -> i), rightward the first (arcs i -> i+1).
IntraStructure pseudo_structure(Span word_span, PseudoDirection direction);

// Pins the intra structure of the given words; uncovered words stay latent.
// Structures must be valid single-root trees matching their word's length.
ForestSpec narrow_forest(const ForestSpec& spec,
                         const std::map<int, IntraStructure>& fixed_structures);

// Intra structure of each word of `seg` under the given head array.
std::vector<IntraStructure> extract_intra_structures(
    const std::vector<Index>& head, const Segmentation& seg);

}  // namespace chardep

#endif  // CHARDEP_CONVERT_HPP
