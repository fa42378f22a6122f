#ifndef CHARDEP_METRICS_HPP
#define CHARDEP_METRICS_HPP

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chardep/types.hpp"

namespace chardep {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Match counts accumulate across sentences (micro average).
struct MatchCounts {
  long matched = 0;
  long gold_total = 0;
  long pred_total = 0;

  void add(const MatchCounts& o) {
    matched += o.matched;
    gold_total += o.gold_total;
    pred_total += o.pred_total;
  }
  PRF prf() const;
};

// Span-exact word segmentation matching. Throws on character-count mismatch.
MatchCounts seg_match_counts(const Segmentation& gold, const Segmentation& pred);
PRF seg_f1(const Segmentation& gold, const Segmentation& pred);

// Word-level dependency F1: an arc counts only if the modifier word span,
// the head word span (and the label, when labeled) all match. Arcs whose
// gold/pred modifier label is in punct_labels are removed first.
MatchCounts dep_match_counts(const WordTree& gold, const WordTree& pred,
                             bool labeled, const std::set<int>& punct_labels);
double dep_f1(const WordTree& gold, const WordTree& pred, bool labeled,
              const std::set<int>& punct_labels);

struct AttachmentCounts {
  long head_correct = 0;
  long both_correct = 0;
  long total = 0;

  void add(const AttachmentCounts& o) {
    head_correct += o.head_correct;
    both_correct += o.both_correct;
    total += o.total;
  }
  double uas() const { return total ? double(head_correct) / total : 0.0; }
  double las() const { return total ? double(both_correct) / total : 0.0; }
};

// Requires identical segmentations (throws otherwise); punctuation words
// (by gold label) are excluded.
AttachmentCounts attachment_counts(const WordTree& gold, const WordTree& pred,
                                   const std::set<int>& punct_labels);
std::pair<double, double> attachment_scores(const WordTree& gold, const WordTree& pred,
                                            const std::set<int>& punct_labels);

// Histogram of intra-word structures keyed by (word length, canonical
// shape); single-character words carry no structure and are skipped.
struct StructureHistogram {
  std::map<int, std::map<std::string, long>> counts;

  void add(const IntraStructure& s);
  void add(const StructureHistogram& o);
  long total(int length) const;
  // Percentages per length, summing to 100 per row.
  std::map<int, std::map<std::string, double>> percentages() const;
};

StructureHistogram structure_distribution(const std::vector<IntraStructure>& pred);

// A word occurrence: (sentence index, word index).
using WordOcc = std::pair<int, int>;
using StructureMap = std::map<WordOcc, IntraStructure>;

struct CmResult {
  double one_to_one = 0.0;  // per-run exact-match rate, averaged (percent)
  double many_to_one = 0.0; // matched by any run (percent)
  long evaluated = 0;
};

// Complete match of intra-word structures against gold annotations over the
// occurrences present in gold; runs are per-seed prediction maps.
CmResult structure_cm(const std::vector<StructureMap>& runs, const StructureMap& gold);

}  // namespace chardep

#endif  // CHARDEP_METRICS_HPP
