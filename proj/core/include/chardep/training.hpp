#ifndef CHARDEP_TRAINING_HPP
#define CHARDEP_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chardep/chart.hpp"
#include "chardep/types.hpp"

namespace chardep {

// Loss components per the two-part decomposition; the integrated
// labeled-forest path reports a single total with the parts not applicable.
struct LossBreakdown {
  double tree_loss = std::numeric_limits<double>::quiet_NaN();
  double label_loss = std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;

  static LossBreakdown decomposed(double tree, double label) {
    return {tree, label, tree + label};
  }
  static LossBreakdown integrated(double total) {
    LossBreakdown b;
    b.total = total;
    return b;
  }
};

// Negative log-probability of the forest: log Z(x) - log Z(x, F). The
// denominator defaults to all projective trees; passing a spec restricts it
// (used by the pipeline-parse objective, which conditions on segmentation).
double tree_loss(const ArcScores& scores, const ForestSpec& spec,
                 const ForestSpec* denominator = nullptr);

// Same, accumulating d(loss)/d s(h,m) into d_scores.
double tree_loss_grad(const ArcScores& scores, const ForestSpec& spec,
                      ArcScores& d_scores, const ForestSpec* denominator = nullptr);

// Gold label for an admissible arc: INTRA within a word, else the gold
// word-level label of the modifier's word (ROOT arcs take the root word's
// label). Throws when the gold label is missing.
int gold_arc_label(const ForestSpec& spec, const WordTree& gold, Index h, Index m);

// Negative log-probability of the labeled forest. Summing the label loss
// arc-by-arc over every tree in the forest would be exponential; instead
// the gold-label log-probabilities are folded into the arc scores of the
// numerator, so the label loss rides through the same constrained Inside
// computation as the tree loss.
double labeled_forest_loss(const ArcScores& scores, const LabelScores& labels,
                           const ForestSpec& spec, const WordTree& gold,
                           const ForestSpec* denominator = nullptr);

double labeled_forest_loss_grad(const ArcScores& scores, const LabelScores& labels,
                                const ForestSpec& spec, const WordTree& gold,
                                ArcScores& d_scores, LabelScores& d_labels,
                                const ForestSpec* denominator = nullptr);

// Coarse-to-fine counterpart: gold-forest derivations are scored by the
// segmentation-routed merged table (numerator) while the partition runs
// over the full coarse-to-fine derivation space, so both role tables are
// trained everywhere.
double labeled_c2f_forest_loss(const C2fArcScores& scores, const LabelScores& labels,
                               const ForestSpec& spec, const WordTree& gold);

double labeled_c2f_forest_loss_grad(const C2fArcScores& scores,
                                    const LabelScores& labels, const ForestSpec& spec,
                                    const WordTree& gold, C2fArcScores& d_scores,
                                    LabelScores& d_labels);

// Argmax label per arc; ties resolve to the smallest label id.
CharTree label_decode(const LabelScores& labels, const std::vector<Index>& heads);

// Role-aware labeling: intra arcs take INTRA, inter arcs the best syntactic
// label.
CharTree label_decode_roled(const LabelScores& labels, const std::vector<Index>& heads,
                            const std::vector<ArcRole>& roles);

enum class TrainMode { kLatent, kLatentC2f, kLeftward, kRightward, kPipelineParse };

const char* to_string(TrainMode mode);
std::optional<TrainMode> parse_train_mode(const std::string& name);

struct TrainConfig {
  int embedding_dim = 32;
  int hidden_dim = 32;
  double learning_rate = 0.2;
  double lr_decay = 0.05;   // step size at epoch e: lr / (1 + decay * e)
  double clip_norm = 5.0;
  int epochs = 50;
  int batch_size = 8;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::kLatent;
};

struct TrainExample {
  CharSentence sent;
  WordTree gold;
};

class Scorer;

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  std::vector<double> loss_trace;  // mean labeled-forest loss per epoch
  int skipped_nonprojective = 0;
};

// First-order training of the scorer on the corpus: mean batch loss,
// gradient clipping, decayed plain gradient descent. Non-projective gold
// trees are skipped and counted. Throws on divergence (non-finite loss or
// parameters) with diagnostics.
TrainResult train(const std::vector<TrainExample>& corpus, Scorer& scorer,
                  const TrainConfig& config,
                  const std::function<void(int, double)>& epoch_hook = {});

// Loss and gradient of one example under the configured mode; grad must be
// sized to the scorer's parameter count. Exposed for gradient checking.
double example_loss(const TrainExample& ex, const Scorer& scorer, TrainMode mode,
                    std::vector<double>* grad);

}  // namespace chardep

#endif  // CHARDEP_TRAINING_HPP
