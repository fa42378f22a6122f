#include "chardep/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace chardep {

void ConstantScorer::score(const CharSentence& x, ArcScores& arc,
                           LabelScores& labels) const {
  const int n = x.size();
  arc = ArcScores(n, arc_fill_);
  labels = LabelScores(n, labels_, label_fill_);
}

void ConstantScorer::score_c2f(const CharSentence& x, C2fArcScores& arc,
                               LabelScores& labels) const {
  const int n = x.size();
  arc = C2fArcScores(n, arc_fill_);
  labels = LabelScores(n, labels_, label_fill_);
}

namespace {
constexpr int kPad = 0;
constexpr int kUnk = 1;
constexpr int kRoot = 2;
constexpr int kSpecialTokens = 3;
}  // namespace

ReferenceScorer::ReferenceScorer(std::vector<char32_t> vocab, LabelSet labels,
                                 Dims dims, bool c2f, std::uint64_t seed)
    : vocab_(std::move(vocab)), labels_(std::move(labels)), dims_(dims),
      c2f_(c2f), seed_(seed) {
  for (int i = 0; i < static_cast<int>(vocab_.size()); ++i)
    vocab_index_[vocab_[i]] = kSpecialTokens + i;
  params_.assign(total_params(), 0.0);

  std::mt19937_64 rng(seed);
  const int E = dims_.embedding, H = dims_.hidden;
  const int F = (2 * kWindow + 1) * E;
  std::uniform_real_distribution<double> emb_init(-0.5, 0.5);
  std::uniform_real_distribution<double> ff_init(-std::sqrt(6.0 / (F + H)),
                                                 std::sqrt(6.0 / (F + H)));
  std::uniform_real_distribution<double> bi_init(-0.05, 0.05);
  const int n_vocab = kSpecialTokens + static_cast<int>(vocab_.size());
  for (int i = 0; i < n_vocab * E; ++i) params_[off_emb() + i] = emb_init(rng);
  for (int i = 0; i < H * F; ++i) params_[off_wh() + i] = ff_init(rng);
  for (int i = 0; i < H * F; ++i) params_[off_wm() + i] = ff_init(rng);
  const int bsz = (H + 1) * (H + 1);
  const int n_arc = c2f_ ? 2 : 1;
  for (int r = 0; r < n_arc; ++r)
    for (int i = 0; i < bsz; ++i) params_[off_arc(r) + i] = bi_init(rng);
  for (int l = 0; l < labels_.size(); ++l)
    for (int i = 0; i < bsz; ++i) params_[off_label(l) + i] = bi_init(rng);
}

std::vector<char32_t> ReferenceScorer::collect_vocab(
    const std::vector<TrainExample>& corpus) {
  std::vector<char32_t> chars;
  for (const auto& ex : corpus)
    chars.insert(chars.end(), ex.sent.chars.begin() + 1, ex.sent.chars.end());
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  return chars;
}

int ReferenceScorer::off_wh() const {
  return off_emb() + (kSpecialTokens + static_cast<int>(vocab_.size())) * dims_.embedding;
}
int ReferenceScorer::off_bh() const {
  return off_wh() + dims_.hidden * (2 * kWindow + 1) * dims_.embedding;
}
int ReferenceScorer::off_wm() const { return off_bh() + dims_.hidden; }
int ReferenceScorer::off_bm() const {
  return off_wm() + dims_.hidden * (2 * kWindow + 1) * dims_.embedding;
}
int ReferenceScorer::off_arc(int role) const {
  return off_bm() + dims_.hidden + role * (dims_.hidden + 1) * (dims_.hidden + 1);
}
int ReferenceScorer::off_label(int l) const {
  return off_arc(0) + ((c2f_ ? 2 : 1) + l) * (dims_.hidden + 1) * (dims_.hidden + 1);
}
int ReferenceScorer::total_params() const {
  return off_label(labels_.size());
}

int ReferenceScorer::token_id(const CharSentence& x, int pos) const {
  if (pos < 0 || pos > x.size()) return kPad;
  if (pos == 0) return kRoot;
  auto it = vocab_index_.find(x.chars[pos]);
  return it == vocab_index_.end() ? kUnk : it->second;
}

// Per-sentence activations: augmented head/modifier representations, one
// row of H entries plus the implicit bias slot.
struct ReferenceScorer::Reps {
  int n = 0;
  int H = 0;
  std::vector<double> head;  // (n+1) x H, tanh outputs
  std::vector<double> mod;
  const double* h(int i) const { return head.data() + i * H; }
  const double* m(int i) const { return mod.data() + i * H; }
};

ReferenceScorer::Reps ReferenceScorer::forward(const CharSentence& x) const {
  const int n = x.size();
  const int E = dims_.embedding, H = dims_.hidden;
  const int W = 2 * kWindow + 1, F = W * E;
  Reps reps;
  reps.n = n;
  reps.H = H;
  reps.head.assign((n + 1) * H, 0.0);
  reps.mod.assign((n + 1) * H, 0.0);
  std::vector<double> feat(F);
  const double* emb = params_.data() + off_emb();
  const double* wh = params_.data() + off_wh();
  const double* bh = params_.data() + off_bh();
  const double* wm = params_.data() + off_wm();
  const double* bm = params_.data() + off_bm();
  for (int i = 0; i <= n; ++i) {
    for (int o = 0; o < W; ++o) {
      const int tok = token_id(x, i + o - kWindow);
      std::copy(emb + tok * E, emb + (tok + 1) * E, feat.begin() + o * E);
    }
    for (int r = 0; r < H; ++r) {
      double ah = bh[r], am = bm[r];
      const double* wrh = wh + r * F;
      const double* wrm = wm + r * F;
      for (int c = 0; c < F; ++c) {
        ah += wrh[c] * feat[c];
        am += wrm[c] * feat[c];
      }
      reps.head[i * H + r] = std::tanh(ah);
      reps.mod[i * H + r] = std::tanh(am);
    }
  }
  return reps;
}

void ReferenceScorer::fill_tables(const Reps& reps, const double* biaffine,
                                  ArcScores& arc) const {
  const int n = reps.n, H = reps.H, D = H + 1;
  // t_j = B * m̂_j, then s(i,j) = ĥ_i . t_j
  std::vector<double> tj((n + 1) * D);
  for (int j = 1; j <= n; ++j) {
    const double* m = reps.m(j);
    for (int a = 0; a < D; ++a) {
      const double* row = biaffine + a * D;
      double acc = row[H];  // bias slot of m̂
      for (int b = 0; b < H; ++b) acc += row[b] * m[b];
      tj[j * D + a] = acc;
    }
  }
  for (int i = 0; i <= n; ++i) {
    const double* h = reps.h(i);
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      const double* t = tj.data() + j * D;
      double acc = t[H];
      for (int a = 0; a < H; ++a) acc += h[a] * t[a];
      arc(i, j) = acc;
    }
  }
}

void ReferenceScorer::fill_labels(const Reps& reps, LabelScores& labels) const {
  const int n = reps.n, H = reps.H, D = H + 1;
  std::vector<double> tj((n + 1) * D);
  for (int l = 0; l < labels_.size(); ++l) {
    const double* U = params_.data() + off_label(l);
    for (int j = 1; j <= n; ++j) {
      const double* m = reps.m(j);
      for (int a = 0; a < D; ++a) {
        const double* row = U + a * D;
        double acc = row[H];
        for (int b = 0; b < H; ++b) acc += row[b] * m[b];
        tj[j * D + a] = acc;
      }
    }
    for (int i = 0; i <= n; ++i) {
      const double* h = reps.h(i);
      for (int j = 1; j <= n; ++j) {
        if (i == j) continue;
        const double* t = tj.data() + j * D;
        double acc = t[H];
        for (int a = 0; a < H; ++a) acc += h[a] * t[a];
        labels(i, j, l) = acc;
      }
    }
  }
}

void ReferenceScorer::score(const CharSentence& x, ArcScores& arc,
                            LabelScores& labels) const {
  const int n = x.size();
  arc = ArcScores(n);
  labels = LabelScores(n, labels_.size());
  const Reps reps = forward(x);
  fill_tables(reps, params_.data() + off_arc(0), arc);
  fill_labels(reps, labels);
}

void ReferenceScorer::score_c2f(const CharSentence& x, C2fArcScores& arc,
                                LabelScores& labels) const {
  if (!c2f_) throw std::logic_error("scorer was built without a second biaffine");
  const int n = x.size();
  arc = C2fArcScores(n);
  labels = LabelScores(n, labels_.size());
  const Reps reps = forward(x);
  fill_tables(reps, params_.data() + off_arc(0), arc.inter);
  fill_tables(reps, params_.data() + off_arc(1), arc.intra);
  arc.mask_intra_root();
  fill_labels(reps, labels);
}

void ReferenceScorer::accumulate_grad(const CharSentence& x, const ArcScores* d_arc,
                                      const C2fArcScores* d_c2f,
                                      const LabelScores& d_labels,
                                      std::vector<double>& grad) const {
  const int n = x.size();
  const int E = dims_.embedding, H = dims_.hidden, D = H + 1;
  const int W = 2 * kWindow + 1, F = W * E;
  const Reps reps = forward(x);

  std::vector<double> dh((n + 1) * D, 0.0), dm((n + 1) * D, 0.0);

  // One bilinear table: dB += ĥ_i r_iᵀ with r_i = Σ_j d(i,j) m̂_j,
  // dĥ_i += B r_i, dm̂_j += Σ_i d(i,j) Bᵀ ĥ_i.
  auto backprop_bilinear = [&](const double* B, double* dB, auto d_at) {
    std::vector<double> r(D), c(D);
    for (int i = 0; i <= n; ++i) {
      std::fill(r.begin(), r.end(), 0.0);
      bool any = false;
      for (int j = 1; j <= n; ++j) {
        if (i == j) continue;
        const double d = d_at(i, j);
        if (d == 0.0) continue;
        any = true;
        const double* m = reps.m(j);
        for (int b = 0; b < H; ++b) r[b] += d * m[b];
        r[H] += d;
      }
      if (!any) continue;
      const double* h = reps.h(i);
      for (int a = 0; a < D; ++a) {
        const double ha = a < H ? h[a] : 1.0;
        double acc = 0.0;
        const double* row = B + a * D;
        double* drow = dB + a * D;
        for (int b = 0; b < D; ++b) {
          drow[b] += ha * r[b];
          acc += row[b] * r[b];
        }
        dh[i * D + a] += acc;
      }
    }
    for (int j = 1; j <= n; ++j) {
      std::fill(c.begin(), c.end(), 0.0);
      bool any = false;
      for (int i = 0; i <= n; ++i) {
        if (i == j) continue;
        const double d = d_at(i, j);
        if (d == 0.0) continue;
        any = true;
        const double* h = reps.h(i);
        for (int a = 0; a < H; ++a) c[a] += d * h[a];
        c[H] += d;
      }
      if (!any) continue;
      for (int b = 0; b < D; ++b) {
        double acc = 0.0;
        for (int a = 0; a < D; ++a) acc += B[a * D + b] * c[a];
        dm[j * D + b] += acc;
      }
    }
  };

  if (d_arc) {
    backprop_bilinear(params_.data() + off_arc(0), grad.data() + off_arc(0),
                      [&](int i, int j) { return (*d_arc)(i, j); });
  }
  if (d_c2f) {
    backprop_bilinear(params_.data() + off_arc(0), grad.data() + off_arc(0),
                      [&](int i, int j) { return d_c2f->inter(i, j); });
    backprop_bilinear(params_.data() + off_arc(1), grad.data() + off_arc(1),
                      [&](int i, int j) { return d_c2f->intra(i, j); });
  }
  for (int l = 0; l < labels_.size(); ++l) {
    backprop_bilinear(params_.data() + off_label(l), grad.data() + off_label(l),
                      [&, l](int i, int j) { return d_labels(i, j, l); });
  }

  // Through tanh into the feed-forward maps and embeddings.
  std::vector<double> feat(F), dfeat(F);
  const double* emb = params_.data() + off_emb();
  const double* wh = params_.data() + off_wh();
  const double* wm = params_.data() + off_wm();
  double* g_wh = grad.data() + off_wh();
  double* g_bh = grad.data() + off_bh();
  double* g_wm = grad.data() + off_wm();
  double* g_bm = grad.data() + off_bm();
  double* g_emb = grad.data() + off_emb();
  for (int i = 0; i <= n; ++i) {
    bool any = false;
    for (int r = 0; r < H; ++r)
      if (dh[i * D + r] != 0.0 || dm[i * D + r] != 0.0) any = true;
    if (!any) continue;
    for (int o = 0; o < W; ++o) {
      const int tok = token_id(x, i + o - kWindow);
      std::copy(emb + tok * E, emb + (tok + 1) * E, feat.begin() + o * E);
    }
    std::fill(dfeat.begin(), dfeat.end(), 0.0);
    for (int r = 0; r < H; ++r) {
      const double yh = reps.head[i * H + r];
      const double ym = reps.mod[i * H + r];
      const double gh = dh[i * D + r] * (1.0 - yh * yh);
      const double gm = dm[i * D + r] * (1.0 - ym * ym);
      if (gh != 0.0) {
        g_bh[r] += gh;
        double* grow = g_wh + r * F;
        const double* row = wh + r * F;
        for (int c = 0; c < F; ++c) {
          grow[c] += gh * feat[c];
          dfeat[c] += gh * row[c];
        }
      }
      if (gm != 0.0) {
        g_bm[r] += gm;
        double* grow = g_wm + r * F;
        const double* row = wm + r * F;
        for (int c = 0; c < F; ++c) {
          grow[c] += gm * feat[c];
          dfeat[c] += gm * row[c];
        }
      }
    }
    for (int o = 0; o < W; ++o) {
      const int tok = token_id(x, i + o - kWindow);
      double* ge = g_emb + tok * E;
      for (int e = 0; e < E; ++e) ge[e] += dfeat[o * E + e];
    }
  }
}

}  // namespace chardep
