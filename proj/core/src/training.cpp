#include "chardep/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "chardep/convert.hpp"
#include "chardep/scorer.hpp"

namespace chardep {

namespace {

// log softmax of t(h, m, .) at label l.
double label_logprob(const LabelScores& t, Index h, Index m, int l) {
  double mx = t(h, m, 0);
  for (int k = 1; k < t.num_labels(); ++k) mx = std::max(mx, t(h, m, k));
  double z = 0.0;
  for (int k = 0; k < t.num_labels(); ++k) z += std::exp(t(h, m, k) - mx);
  return t(h, m, l) - mx - std::log(z);
}

ArcScores augment_with_gold_labels(const ArcScores& scores, const LabelScores& labels,
                                   const ForestSpec& spec, const WordTree& gold) {
  const int n = scores.size();
  ArcScores aug = scores;
  for (Index h = 0; h <= n; ++h) {
    for (Index m = 1; m <= n; ++m) {
      if (h == m || is_masked(scores(h, m))) continue;
      if (!spec.admissible(h, m)) continue;
      aug(h, m) += label_logprob(labels, h, m, gold_arc_label(spec, gold, h, m));
    }
  }
  return aug;
}

}  // namespace

int gold_arc_label(const ForestSpec& spec, const WordTree& gold, Index h, Index m) {
  if (h != 0 && spec.word_of[h] == spec.word_of[m]) return LabelSet::kIntra;
  const int l = gold.wlabel[spec.word_of[m]];
  if (l < 0) {
    std::ostringstream os;
    os << "missing gold label for arc (" << h << "," << m << ")";
    throw std::invalid_argument(os.str());
  }
  return l;
}

double tree_loss(const ArcScores& scores, const ForestSpec& spec,
                 const ForestSpec* denominator) {
  const double log_z =
      denominator ? constrained_inside(scores, *denominator) : inside(scores);
  return log_z - constrained_inside(scores, spec);
}

double tree_loss_grad(const ArcScores& scores, const ForestSpec& spec,
                      ArcScores& d_scores, const ForestSpec* denominator) {
  const double loss = tree_loss(scores, spec, denominator);
  const ArcScores m_all = arc_marginals(scores, denominator);
  const ArcScores m_forest = arc_marginals(scores, &spec);
  const int n = scores.size();
  for (Index h = 0; h <= n; ++h)
    for (Index m = 1; m <= n; ++m)
      if (h != m) d_scores(h, m) += m_all(h, m) - m_forest(h, m);
  return loss;
}

double labeled_forest_loss(const ArcScores& scores, const LabelScores& labels,
                           const ForestSpec& spec, const WordTree& gold,
                           const ForestSpec* denominator) {
  const ArcScores aug = augment_with_gold_labels(scores, labels, spec, gold);
  const double log_z =
      denominator ? constrained_inside(scores, *denominator) : inside(scores);
  return log_z - constrained_inside(aug, spec);
}

double labeled_forest_loss_grad(const ArcScores& scores, const LabelScores& labels,
                                const ForestSpec& spec, const WordTree& gold,
                                ArcScores& d_scores, LabelScores& d_labels,
                                const ForestSpec* denominator) {
  const int n = scores.size();
  const ArcScores aug = augment_with_gold_labels(scores, labels, spec, gold);
  const double log_z =
      denominator ? constrained_inside(scores, *denominator) : inside(scores);
  const double log_zf = constrained_inside(aug, spec);

  const ArcScores m_all = arc_marginals(scores, denominator);
  const ArcScores m_forest = arc_marginals(aug, &spec);
  const int num_labels = labels.num_labels();
  for (Index h = 0; h <= n; ++h) {
    for (Index m = 1; m <= n; ++m) {
      if (h == m) continue;
      d_scores(h, m) += m_all(h, m) - m_forest(h, m);
      if (m_forest(h, m) == 0.0) continue;
      // d/dt of -marginal * log softmax(t)[gold].
      const int gold_l = gold_arc_label(spec, gold, h, m);
      double mx = labels(h, m, 0);
      for (int l = 1; l < num_labels; ++l) mx = std::max(mx, labels(h, m, l));
      double z = 0.0;
      for (int l = 0; l < num_labels; ++l) z += std::exp(labels(h, m, l) - mx);
      for (int l = 0; l < num_labels; ++l) {
        const double p = std::exp(labels(h, m, l) - mx) / z;
        d_labels(h, m, l) += m_forest(h, m) * (p - (l == gold_l ? 1.0 : 0.0));
      }
    }
  }
  return log_z - log_zf;
}

double labeled_c2f_forest_loss(const C2fArcScores& scores, const LabelScores& labels,
                               const ForestSpec& spec, const WordTree& gold) {
  const ArcScores merged = merge_c2f_scores(scores, spec);
  const ArcScores aug = augment_with_gold_labels(merged, labels, spec, gold);
  return c2f_inside(scores) - constrained_inside(aug, spec);
}

double labeled_c2f_forest_loss_grad(const C2fArcScores& scores,
                                    const LabelScores& labels, const ForestSpec& spec,
                                    const WordTree& gold, C2fArcScores& d_scores,
                                    LabelScores& d_labels) {
  const int n = scores.size();
  const ArcScores merged = merge_c2f_scores(scores, spec);
  const ArcScores aug = augment_with_gold_labels(merged, labels, spec, gold);
  const double log_z = c2f_inside(scores);
  const double log_zf = constrained_inside(aug, spec);

  const C2fMarginals m_all = c2f_arc_marginals(scores);
  const ArcScores m_forest = arc_marginals(aug, &spec);
  const int num_labels = labels.num_labels();
  for (Index h = 0; h <= n; ++h) {
    for (Index m = 1; m <= n; ++m) {
      if (h == m) continue;
      const bool intra = h != 0 && spec.word_of[h] == spec.word_of[m];
      d_scores.intra(h, m) += m_all.intra(h, m) - (intra ? m_forest(h, m) : 0.0);
      d_scores.inter(h, m) += m_all.inter(h, m) - (intra ? 0.0 : m_forest(h, m));
      if (m_forest(h, m) == 0.0) continue;
      const int gold_l = gold_arc_label(spec, gold, h, m);
      double mx = labels(h, m, 0);
      for (int l = 1; l < num_labels; ++l) mx = std::max(mx, labels(h, m, l));
      double z = 0.0;
      for (int l = 0; l < num_labels; ++l) z += std::exp(labels(h, m, l) - mx);
      for (int l = 0; l < num_labels; ++l) {
        const double p = std::exp(labels(h, m, l) - mx) / z;
        d_labels(h, m, l) += m_forest(h, m) * (p - (l == gold_l ? 1.0 : 0.0));
      }
    }
  }
  return log_z - log_zf;
}

CharTree label_decode(const LabelScores& labels, const std::vector<Index>& heads) {
  const int n = static_cast<int>(heads.size()) - 1;
  CharTree out(n);
  out.head = heads;
  for (Index m = 1; m <= n; ++m) {
    int best = 0;
    for (int l = 1; l < labels.num_labels(); ++l)
      if (labels(heads[m], m, l) > labels(heads[m], m, best)) best = l;
    out.label[m] = best;
  }
  return out;
}

CharTree label_decode_roled(const LabelScores& labels, const std::vector<Index>& heads,
                            const std::vector<ArcRole>& roles) {
  const int n = static_cast<int>(heads.size()) - 1;
  CharTree out(n);
  out.head = heads;
  for (Index m = 1; m <= n; ++m) {
    if (roles[m] == ArcRole::kIntra) {
      out.label[m] = LabelSet::kIntra;
      continue;
    }
    int best = -1;
    for (int l = 0; l < labels.num_labels(); ++l) {
      if (l == LabelSet::kIntra) continue;
      if (best < 0 || labels(heads[m], m, l) > labels(heads[m], m, best)) best = l;
    }
    out.label[m] = best;
  }
  return out;
}

const char* to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kLatent: return "latent";
    case TrainMode::kLatentC2f: return "latent-c2f";
    case TrainMode::kLeftward: return "leftward";
    case TrainMode::kRightward: return "rightward";
    case TrainMode::kPipelineParse: return "pipeline-parse";
  }
  return "?";
}

std::optional<TrainMode> parse_train_mode(const std::string& name) {
  for (TrainMode m : {TrainMode::kLatent, TrainMode::kLatentC2f, TrainMode::kLeftward,
                      TrainMode::kRightward, TrainMode::kPipelineParse})
    if (name == to_string(m)) return m;
  return std::nullopt;
}

namespace {

ForestSpec supervision_spec(const TrainExample& ex, TrainMode mode) {
  ForestSpec spec = word_tree_to_forest(ex.gold);
  if (mode == TrainMode::kLeftward || mode == TrainMode::kRightward) {
    const auto dir = mode == TrainMode::kLeftward ? PseudoDirection::kLeftward
                                                  : PseudoDirection::kRightward;
    std::map<int, IntraStructure> fixed;
    for (int w = 1; w <= spec.num_words(); ++w)
      fixed[w] = pseudo_structure(spec.seg.spans[w - 1], dir);
    spec = narrow_forest(spec, fixed);
  }
  return spec;
}

}  // namespace

double example_loss(const TrainExample& ex, const Scorer& scorer, TrainMode mode,
                    std::vector<double>* grad) {
  const int n = ex.sent.size();
  const ForestSpec spec = supervision_spec(ex, mode);
  std::optional<ForestSpec> denom;
  if (mode == TrainMode::kPipelineParse)
    denom = ForestSpec::segmentation_only(spec.seg);
  const ForestSpec* denom_ptr = denom ? &*denom : nullptr;

  LabelScores labels;
  if (mode == TrainMode::kLatentC2f) {
    C2fArcScores c2f(n);
    labels = LabelScores(n, scorer.num_labels());
    scorer.score_c2f(ex.sent, c2f, labels);
    if (!grad) return labeled_c2f_forest_loss(c2f, labels, spec, ex.gold);
    C2fArcScores d_c2f(n, 0.0);
    for (auto& v : d_c2f.intra.data()) v = 0.0;
    for (auto& v : d_c2f.inter.data()) v = 0.0;
    LabelScores d_labels(n, scorer.num_labels(), 0.0);
    const double loss =
        labeled_c2f_forest_loss_grad(c2f, labels, spec, ex.gold, d_c2f, d_labels);
    scorer.accumulate_grad(ex.sent, nullptr, &d_c2f, d_labels, *grad);
    return loss;
  }

  ArcScores arc(n);
  labels = LabelScores(n, scorer.num_labels());
  scorer.score(ex.sent, arc, labels);
  if (!grad) return labeled_forest_loss(arc, labels, spec, ex.gold, denom_ptr);
  ArcScores d_arc(n, 0.0);
  for (auto& v : d_arc.data()) v = 0.0;
  LabelScores d_labels(n, scorer.num_labels(), 0.0);
  const double loss = labeled_forest_loss_grad(arc, labels, spec, ex.gold, d_arc,
                                               d_labels, denom_ptr);
  scorer.accumulate_grad(ex.sent, &d_arc, nullptr, d_labels, *grad);
  return loss;
}

TrainResult train(const std::vector<TrainExample>& corpus, Scorer& scorer,
                  const TrainConfig& config,
                  const std::function<void(int, double)>& epoch_hook) {
  TrainResult result;
  std::vector<int> usable;
  for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
    if (validate_word_tree(corpus[i].gold))
      usable.push_back(i);
    else
      ++result.skipped_nonprojective;
  }
  if (usable.empty()) throw std::invalid_argument("no projective training sentences");

  std::vector<double>& params = scorer.params();
  std::vector<double> grad(params.size(), 0.0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(epoch) * 0x9e3779b9ULL);
    std::vector<int> order = usable;
    std::shuffle(order.begin(), order.end(), rng);

    const double lr = config.learning_rate / (1.0 + config.lr_decay * epoch);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t stop = std::min(order.size(), start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (size_t k = start; k < stop; ++k)
        batch_loss += example_loss(corpus[order[k]], scorer, config.mode, &grad);
      const double scale = 1.0 / static_cast<double>(stop - start);
      batch_loss *= scale;
      epoch_loss += batch_loss * static_cast<double>(stop - start);
      if (!std::isfinite(batch_loss)) {
        std::ostringstream os;
        os << "training diverged: non-finite loss at epoch " << epoch
           << " batch starting " << start;
        throw DivergenceError(os.str());
      }
      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g * scale * scale;
      const double norm = std::sqrt(norm2);
      const double clip = config.clip_norm > 0 && norm > config.clip_norm
                              ? config.clip_norm / norm
                              : 1.0;
      for (size_t p = 0; p < params.size(); ++p)
        params[p] -= lr * clip * scale * grad[p];
    }
    for (double p : params) {
      if (!std::isfinite(p)) {
        std::ostringstream os;
        os << "training diverged: non-finite parameter after epoch " << epoch;
        throw DivergenceError(os.str());
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    result.loss_trace.push_back(epoch_loss);
    if (epoch_hook) epoch_hook(epoch, epoch_loss);
  }
  return result;
}

}  // namespace chardep
