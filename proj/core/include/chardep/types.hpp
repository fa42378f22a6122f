#ifndef CHARDEP_TYPES_HPP
#define CHARDEP_TYPES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chardep {

// Position index into a sentence; 0 is the artificial ROOT token.
using Index = int;

// Masked score sentinel. Anything at or below kMaskedThreshold is the
// semiring zero; arithmetic stays total (no IEEE infinities, no NaN in
// log-sum-exp).
inline constexpr double kMaskedScore = -1e9;
inline constexpr double kMaskedThreshold = kMaskedScore / 2;

inline bool is_masked(double v) { return v <= kMaskedThreshold; }

struct NoValidTreeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IllegalStructureError : std::runtime_error {
  // Offending arcs as (head, modifier) pairs.
  std::vector<std::pair<Index, Index>> arcs;
  IllegalStructureError(const std::string& what,
                        std::vector<std::pair<Index, Index>> offending)
      : std::runtime_error(what), arcs(std::move(offending)) {}
};

// A sentence of characters c_1..c_n; chars[0] is a placeholder for ROOT.
struct CharSentence {
  std::vector<char32_t> chars;  // size n+1, chars[0] unused

  CharSentence() : chars(1, U'\0') {}
  explicit CharSentence(std::u32string_view text);

  int size() const { return static_cast<int>(chars.size()) - 1; }
};

std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
std::string utf8_encode(char32_t c);

// Contiguous word span, inclusive character indices.
struct Span {
  Index begin = 0;
  Index end = 0;
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
  int length() const { return end - begin + 1; }
};

// Partition of 1..n into contiguous word spans.
struct Segmentation {
  std::vector<Span> spans;

  Segmentation() = default;
  explicit Segmentation(std::vector<Span> s) : spans(std::move(s)) {}
  // From word lengths, starting at position 1.
  static Segmentation from_lengths(const std::vector<int>& lengths);

  int num_words() const { return static_cast<int>(spans.size()); }
  int num_chars() const { return spans.empty() ? 0 : spans.back().end; }
  bool valid() const;  // sorted, contiguous, covers 1..n exactly

  // word_of[c] = 1-based word index of character c; word_of[0] = 0 (ROOT).
  std::vector<int> word_of() const;

  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

// BMES encoding used by the pipeline segmenter; one tag per character.
std::string segmentation_to_bmes(const Segmentation& seg);
Segmentation segmentation_from_bmes(std::string_view tags);

// Interned dependency labels. INTRA is always id 0; the ROOT-attachment
// label is a distinguished (configurable) member.
class LabelSet {
 public:
  static constexpr int kIntra = 0;
  static constexpr const char* kIntraName = "intra";

  LabelSet() = default;
  explicit LabelSet(const std::vector<std::string>& syntactic,
                    const std::string& root_label = "root");
  // Rebuild with exact id order (names[0] must be the INTRA label).
  static LabelSet from_names(const std::vector<std::string>& names,
                             const std::string& root_label);

  int intern(const std::string& name);
  void set_root(const std::string& name) { root_id_ = intern(name); }
  int id_of(const std::string& name) const;  // -1 if absent
  const std::string& name_of(int id) const { return names_.at(id); }
  int size() const { return static_cast<int>(names_.size()); }
  int root_id() const { return root_id_; }
  bool is_syntactic(int id) const { return id != kIntra; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_{kIntraName};
  std::map<std::string, int> ids_{{kIntraName, kIntra}};
  int root_id_ = -1;
};

// Labeled character-level dependency tree: head[m] and label[m] for each
// modifier 1..n; head[0] = -1 is unused.
struct CharTree {
  std::vector<Index> head;
  std::vector<int> label;

  CharTree() = default;
  explicit CharTree(int n) : head(n + 1, -1), label(n + 1, -1) {}
  int size() const { return static_cast<int>(head.size()) - 1; }
  friend bool operator==(const CharTree&, const CharTree&) = default;
};

// Word-level dependency tree over a segmentation; whead[w] in 0..W with 0
// the root attachment, indices 1-based per word.
struct WordTree {
  Segmentation seg;
  std::vector<Index> whead;  // size W+1, whead[0] = -1 unused
  std::vector<int> wlabel;   // size W+1

  WordTree() = default;
  explicit WordTree(Segmentation s)
      : seg(std::move(s)),
        whead(seg.num_words() + 1, -1),
        wlabel(seg.num_words() + 1, -1) {}
  int num_words() const { return seg.num_words(); }
  friend bool operator==(const WordTree&, const WordTree&) = default;
};

// Tree shape only (single ROOT attachment, acyclic), projectivity not
// required.
bool heads_single_rooted_tree(const std::vector<Index>& head);

// True iff the head array forms a single-root, acyclic, projective tree
// over 1..n with root attachment at 0. Pure predicate, no diagnostics.
bool validate_heads(const std::vector<Index>& head);
bool validate_char_tree(const CharTree& tree);
bool validate_word_tree(const WordTree& tree);

// Dense (n+1)x(n+1) score table; (h, m) scores the arc h -> m. Row-major.
// The diagonal and column 0 are unused and kept masked.
class ArcScores {
 public:
  ArcScores() = default;
  explicit ArcScores(int n, double fill = 0.0);

  int size() const { return n_; }
  double operator()(Index h, Index m) const { return data_[h * (n_ + 1) + m]; }
  double& operator()(Index h, Index m) { return data_[h * (n_ + 1) + m]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int n_ = 0;
  std::vector<double> data_;
};

// Dual score tables for coarse-to-fine parsing. Row 0 of intra is masked:
// ROOT never heads an intra-word arc.
struct C2fArcScores {
  ArcScores intra;
  ArcScores inter;

  C2fArcScores() = default;
  explicit C2fArcScores(int n, double fill = 0.0);
  int size() const { return inter.size(); }
  void mask_intra_root();
};

// (n+1)x(n+1)x|labels| table; (h, m, l) scores label l on arc h -> m.
class LabelScores {
 public:
  LabelScores() = default;
  LabelScores(int n, int num_labels, double fill = 0.0);

  int size() const { return n_; }
  int num_labels() const { return labels_; }
  double operator()(Index h, Index m, int l) const {
    return data_[(h * (n_ + 1) + m) * labels_ + l];
  }
  double& operator()(Index h, Index m, int l) {
    return data_[(h * (n_ + 1) + m) * labels_ + l];
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  int n_ = 0;
  int labels_ = 0;
  std::vector<double> data_;
};

// One word's internal structure: head[p] for 1-based positions within the
// word, 0 marking the word root.
struct IntraStructure {
  std::vector<int> head;  // size = word length, 1-based entries, 0 = root

  int length() const { return static_cast<int>(head.size()); }
  int root_pos() const;  // 1-based, -1 if malformed
  bool valid() const;    // single root, acyclic
  friend bool operator==(const IntraStructure&, const IntraStructure&) = default;
  friend auto operator<=>(const IntraStructure&, const IntraStructure&) = default;

  // Canonical shape key: within-word head positions with the root marked,
  // e.g. leftward over 3 chars -> "2 3 R".
  std::string shape() const;
};

// Compatibility constraints induced by a segmentation plus (optionally)
// word-level heads: the forest of admissible character-level trees.
//
// With whead present, arc (h, m) is admissible iff h and m share a word,
// or word(m) is headed by word(h), or h = 0 and m lies in the root word.
// Without whead (segmentation-only), any cross-word arc and any root
// attachment is admissible; the structural constraints still apply.
// Narrowed words additionally pin their intra structure and root char.
struct ForestSpec {
  Segmentation seg;
  std::vector<Index> whead;            // empty => segmentation-only
  std::map<int, IntraStructure> fixed; // word index -> pinned structure

  // Derived.
  std::vector<int> word_of;  // size n+1, word_of[0] = 0
  int root_word = 0;         // 0 when segmentation-only

  ForestSpec() = default;
  ForestSpec(Segmentation s, std::vector<Index> heads);
  static ForestSpec segmentation_only(Segmentation s);

  int num_chars() const { return seg.num_chars(); }
  int num_words() const { return seg.num_words(); }
  bool has_whead() const { return !whead.empty(); }

  bool admissible(Index h, Index m) const;
  // Root character of word w when pinned by a fixed structure, else -1.
  Index fixed_root_char(int w) const;

  // Copy of `scores` with inadmissible entries set to the mask sentinel.
  ArcScores mask(const ArcScores& scores) const;
};

// arc_admissible with range checking (throws std::out_of_range).
bool arc_admissible(const ForestSpec& spec, Index h, Index m);

}  // namespace chardep

#endif  // CHARDEP_TYPES_HPP
