#ifndef CHARDEP_TESTS_TOY_GRAMMAR_HPP
#define CHARDEP_TESTS_TOY_GRAMMAR_HPP

#include <cstdint>
#include <vector>

#include "chardep/io.hpp"
#include "chardep/types.hpp"

namespace chardep::toy {

// Deterministic template grammar over a small Latin-character lexicon:
// determiner/adverb/punctuation words of one character, noun words of two
// or three characters, verb words of two, with class-disjoint character
// sets so segmentation and attachment are recoverable from context.
//
// Word-level trees: the verb is the root; nouns attach to the verb
// (nsubj/dobj), determiners to their following noun, adverbs and the
// trailing punctuation to the verb.
struct GrammarConfig {
  bool with_dets = true;
  bool with_adv = true;
  bool with_punct = true;
};

std::vector<ConllSentence> generate(int count, std::uint64_t seed, LabelSet& labels,
                                    GrammarConfig config = {});

std::vector<TrainExample> to_examples(const std::vector<ConllSentence>& corpus);

}  // namespace chardep::toy

#endif  // CHARDEP_TESTS_TOY_GRAMMAR_HPP
