#ifndef CHARDEP_SCORER_HPP
#define CHARDEP_SCORER_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "chardep/training.hpp"
#include "chardep/types.hpp"

namespace chardep {

// Pluggable scoring contract: deterministic score tables from a sentence,
// a flat parameter vector, and a gradient-accumulation hook.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual bool is_c2f() const = 0;
  virtual int num_labels() const = 0;

  virtual void score(const CharSentence& x, ArcScores& arc,
                     LabelScores& labels) const = 0;
  virtual void score_c2f(const CharSentence& x, C2fArcScores& arc,
                         LabelScores& labels) const = 0;

  // Accumulates d(loss)/d(params) into grad given upstream table gradients;
  // exactly one of d_arc / d_c2f is non-null.
  virtual void accumulate_grad(const CharSentence& x, const ArcScores* d_arc,
                               const C2fArcScores* d_c2f,
                               const LabelScores& d_labels,
                               std::vector<double>& grad) const = 0;

  virtual std::vector<double>& params() = 0;
  virtual const std::vector<double>& params() const = 0;
};

// Fixed-score scorer (zero parameters); closed-form losses in tests.
class ConstantScorer : public Scorer {
 public:
  ConstantScorer(int num_labels, double arc_fill = 0.0, double label_fill = 0.0)
      : labels_(num_labels), arc_fill_(arc_fill), label_fill_(label_fill) {}

  bool is_c2f() const override { return false; }
  int num_labels() const override { return labels_; }
  void score(const CharSentence& x, ArcScores& arc, LabelScores& labels) const override;
  void score_c2f(const CharSentence& x, C2fArcScores& arc, LabelScores& labels) const override;
  void accumulate_grad(const CharSentence&, const ArcScores*, const C2fArcScores*,
                       const LabelScores&, std::vector<double>&) const override {}
  std::vector<double>& params() override { return params_; }
  const std::vector<double>& params() const override { return params_; }

 private:
  int labels_;
  double arc_fill_, label_fill_;
  std::vector<double> params_;
};

// Trainable reference scorer: character embeddings, window-2 feature
// concatenation, head/modifier feed-forward maps, and a biaffine form per
// role (one in latent mode, intra + inter in c2f mode) plus per-label
// biaffines.
class ReferenceScorer : public Scorer {
 public:
  struct Dims {
    int embedding = 32;
    int hidden = 32;
  };
  static constexpr int kWindow = 2;  // positions i-2 .. i+2

  ReferenceScorer(std::vector<char32_t> vocab, LabelSet labels, Dims dims,
                  bool c2f, std::uint64_t seed);

  // Sorted unique characters of the corpus (deterministic vocabulary).
  static std::vector<char32_t> collect_vocab(const std::vector<TrainExample>& corpus);

  bool is_c2f() const override { return c2f_; }
  int num_labels() const override { return labels_.size(); }
  const LabelSet& labels() const { return labels_; }
  const std::vector<char32_t>& vocab() const { return vocab_; }
  Dims dims() const { return dims_; }
  std::uint64_t seed() const { return seed_; }

  void score(const CharSentence& x, ArcScores& arc, LabelScores& labels) const override;
  void score_c2f(const CharSentence& x, C2fArcScores& arc, LabelScores& labels) const override;
  void accumulate_grad(const CharSentence& x, const ArcScores* d_arc,
                       const C2fArcScores* d_c2f, const LabelScores& d_labels,
                       std::vector<double>& grad) const override;

  std::vector<double>& params() override { return params_; }
  const std::vector<double>& params() const override { return params_; }

 private:
  struct Reps;  // per-sentence forward activations

  int token_id(const CharSentence& x, int pos) const;
  Reps forward(const CharSentence& x) const;
  void fill_tables(const Reps& reps, const double* biaffine, ArcScores& arc) const;
  void fill_labels(const Reps& reps, LabelScores& labels) const;

  // Parameter block offsets into the flat vector.
  int off_emb() const { return 0; }
  int off_wh() const;
  int off_bh() const;
  int off_wm() const;
  int off_bm() const;
  int off_arc(int role) const;  // role 0 = inter, 1 = intra (c2f only)
  int off_label(int l) const;
  int total_params() const;

  std::vector<char32_t> vocab_;  // ids 3.. ; 0 pad, 1 unk, 2 root
  std::map<char32_t, int> vocab_index_;
  LabelSet labels_;
  Dims dims_;
  bool c2f_;
  std::uint64_t seed_;
  std::vector<double> params_;
};

}  // namespace chardep

#endif  // CHARDEP_SCORER_HPP
