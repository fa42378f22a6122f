#ifndef CHARDEP_IO_HPP
#define CHARDEP_IO_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "chardep/scorer.hpp"
#include "chardep/training.hpp"
#include "chardep/types.hpp"

namespace chardep {

// File-format error with one-based line number baked into the message.
struct ParseError : std::runtime_error {
  int line = 0;
  ParseError(const std::string& what, int line_no);
};

struct ConllSentence {
  CharSentence sent;
  WordTree tree;
  std::vector<std::string> forms;  // original word strings, size W+1, [0] empty
  bool projective = true;
};

// CoNLL-X-like 10-column blocks (id, form, lemma, cpos, pos, feats, head,
// deprel, phead, pdeprel); blank lines separate sentences. Word forms are
// concatenated into the character sequence; labels are interned into the
// shared set. Non-projective sentences are flagged, not dropped.
std::vector<ConllSentence> read_conll(const std::string& path, LabelSet& labels);
void write_conll(const std::string& path, const std::vector<ConllSentence>& corpus,
                 const LabelSet& labels);

// Word strings recoverable from the character sequence and a segmentation.
std::vector<std::string> forms_from_segmentation(const CharSentence& sent,
                                                 const Segmentation& seg);

struct CharTreeSentence {
  CharSentence sent;
  CharTree tree;
};

// Four tab-separated columns per character: id, char, head, label.
std::vector<CharTreeSentence> read_char_trees(const std::string& path, LabelSet& labels);
void write_char_trees(const std::string& path,
                      const std::vector<CharTreeSentence>& corpus,
                      const LabelSet& labels);

// Word-type intra-structure annotations: FORM<TAB>h1,h2,...,hk with 1-based
// within-word heads and 0 marking the root; '#' lines are comments.
std::map<std::u32string, IntraStructure> read_intra_annotations(const std::string& path);

// Key-value training configuration ("key value" or "key = value" lines).
TrainConfig load_train_config(const std::string& path);

// Text model files; writing is byte-deterministic for identical parameters.
void save_model(const std::string& path, const ReferenceScorer& scorer,
                TrainMode mode);
struct LoadedModel {
  std::unique_ptr<ReferenceScorer> scorer;
  TrainMode mode = TrainMode::kLatent;
};
LoadedModel load_model(const std::string& path);

}  // namespace chardep

#endif  // CHARDEP_IO_HPP
