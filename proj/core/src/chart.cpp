#include "chardep/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace chardep {

namespace {

// Sum in log space; any masked operand acts as the semiring zero.
inline double log_add(double a, double b) {
  if (is_masked(a)) return b;
  if (is_masked(b)) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

struct Table {
  int stride = 0;
  std::vector<double> v;
  Table(int n, double fill) : stride(n + 1), v((n + 1) * (n + 1), fill) {}
  double& at(int i, int j) { return v[i * stride + j]; }
  double at(int i, int j) const { return v[i * stride + j]; }
};

struct BpTable {
  int stride = 0;
  std::vector<int32_t> v;
  BpTable(int n) : stride(n + 1), v((n + 1) * (n + 1), -1) {}
  int32_t& at(int i, int j) { return v[i * stride + j]; }
  int32_t at(int i, int j) const { return v[i * stride + j]; }
};

// Structural constraint masks derived from the segmentation.
//   C(i->j): if i and j lie in different words, j must end a word
//            (single-root); if (i,k) lies inside a word, (k,j) must stay
//            inside that word (root-as-head). Mirrored for C(i<-j).
struct Masks {
  std::vector<int> word_of;
  std::vector<char> lbound, rbound;
  bool single_root = true;
  bool root_as_head = true;

  Masks(const ForestSpec& spec, ConstraintFlags flags)
      : word_of(spec.word_of),
        lbound(spec.num_chars() + 1, 0),
        rbound(spec.num_chars() + 1, 0),
        single_root(flags.single_root),
        root_as_head(flags.root_as_head) {
    for (const Span& s : spec.seg.spans) {
      lbound[s.begin] = 1;
      rbound[s.end] = 1;
    }
  }

  bool complete_right_ok(int i, int j) const {
    return !single_root || word_of[i] == word_of[j] || rbound[j];
  }
  bool complete_left_ok(int i, int j) const {
    return !single_root || word_of[i] == word_of[j] || lbound[i];
  }
  bool comb_right_ok(int i, int k, int j) const {
    return !root_as_head || word_of[i] != word_of[k] || word_of[k] == word_of[j];
  }
  bool comb_left_ok(int i, int k, int j) const {
    return !root_as_head || word_of[k] != word_of[j] || word_of[i] == word_of[k];
  }
};

// Inside chart in log space over positions 1..n; ROOT attachment is folded
// in at the goal so exactly one arc leaves position 0.
struct InsideChart {
  int n;
  Table cr, cl, ir, il;
  std::vector<double> goal;  // per root candidate r
  double log_z = kMaskedScore;

  InsideChart(const ArcScores& s, const Masks* m)
      : n(s.size()),
        cr(n, kMaskedScore),
        cl(n, kMaskedScore),
        ir(n, kMaskedScore),
        il(n, kMaskedScore),
        goal(n + 1, kMaskedScore) {
    for (int i = 1; i <= n; ++i) cr.at(i, i) = cl.at(i, i) = 0.0;
    for (int w = 1; w < n; ++w) {
      for (int i = 1; i + w <= n; ++i) {
        const int j = i + w;
        double span = kMaskedScore;
        for (int k = i; k < j; ++k)
          span = log_add(span, sum2(cr.at(i, k), cl.at(k + 1, j)));
        if (!is_masked(span)) {
          if (!is_masked(s(i, j))) ir.at(i, j) = s(i, j) + span;
          if (!is_masked(s(j, i))) il.at(i, j) = s(j, i) + span;
        }
        if (!m || m->complete_right_ok(i, j)) {
          double acc = kMaskedScore;
          for (int k = i + 1; k <= j; ++k) {
            if (m && !m->comb_right_ok(i, k, j)) continue;
            acc = log_add(acc, sum2(ir.at(i, k), cr.at(k, j)));
          }
          cr.at(i, j) = acc;
        }
        if (!m || m->complete_left_ok(i, j)) {
          double acc = kMaskedScore;
          for (int k = i; k < j; ++k) {
            if (m && !m->comb_left_ok(i, k, j)) continue;
            acc = log_add(acc, sum2(cl.at(i, k), il.at(k, j)));
          }
          cl.at(i, j) = acc;
        }
      }
    }
    for (int r = 1; r <= n; ++r) {
      if (is_masked(s(0, r))) continue;
      const double g = sum2(sum2(cl.at(1, r), cr.at(r, n)), s(0, r));
      goal[r] = g;
      log_z = log_add(log_z, g);
    }
  }

  static double sum2(double a, double b) {
    return (is_masked(a) || is_masked(b)) ? kMaskedScore : a + b;
  }
};

// Adjoint of the inside pass: distributes posterior mass back through every
// log-sum-exp, yielding d log Z / d s(h,m) = P(arc in tree).
ArcScores inside_backward(const ArcScores& s, const Masks* m, const InsideChart& f) {
  const int n = f.n;
  ArcScores marg(n, 0.0);
  for (auto& v : marg.data()) v = 0.0;
  Table bcr(n, 0.0), bcl(n, 0.0), bir(n, 0.0), bil(n, 0.0);

  for (int r = 1; r <= n; ++r) {
    if (is_masked(f.goal[r])) continue;
    const double p = std::exp(f.goal[r] - f.log_z);
    marg(0, r) += p;
    bcl.at(1, r) += p;
    bcr.at(r, n) += p;
  }

  for (int w = n - 1; w >= 1; --w) {
    for (int i = 1; i + w <= n; ++i) {
      const int j = i + w;
      // Complete cells first: they feed incomplete cells of the same width.
      if (!is_masked(f.cr.at(i, j)) && bcr.at(i, j) != 0.0) {
        const double a = bcr.at(i, j);
        for (int k = i + 1; k <= j; ++k) {
          if (m && !m->comb_right_ok(i, k, j)) continue;
          const double part = InsideChart::sum2(f.ir.at(i, k), f.cr.at(k, j));
          if (is_masked(part)) continue;
          const double wgt = a * std::exp(part - f.cr.at(i, j));
          bir.at(i, k) += wgt;
          bcr.at(k, j) += wgt;
        }
      }
      if (!is_masked(f.cl.at(i, j)) && bcl.at(i, j) != 0.0) {
        const double a = bcl.at(i, j);
        for (int k = i; k < j; ++k) {
          if (m && !m->comb_left_ok(i, k, j)) continue;
          const double part = InsideChart::sum2(f.cl.at(i, k), f.il.at(k, j));
          if (is_masked(part)) continue;
          const double wgt = a * std::exp(part - f.cl.at(i, j));
          bcl.at(i, k) += wgt;
          bil.at(k, j) += wgt;
        }
      }
      const double bR = bir.at(i, j), bL = bil.at(i, j);
      if (bR == 0.0 && bL == 0.0) continue;
      if (!is_masked(f.ir.at(i, j))) marg(i, j) += bR;
      if (!is_masked(f.il.at(i, j))) marg(j, i) += bL;
      // Both incomplete items share the child split distribution.
      const double spanR = is_masked(f.ir.at(i, j)) ? kMaskedScore : f.ir.at(i, j) - s(i, j);
      const double spanL = is_masked(f.il.at(i, j)) ? kMaskedScore : f.il.at(i, j) - s(j, i);
      for (int k = i; k < j; ++k) {
        const double part = InsideChart::sum2(f.cr.at(i, k), f.cl.at(k + 1, j));
        if (is_masked(part)) continue;
        double wgt = 0.0;
        if (bR != 0.0 && !is_masked(spanR)) wgt += bR * std::exp(part - spanR);
        if (bL != 0.0 && !is_masked(spanL)) wgt += bL * std::exp(part - spanL);
        if (wgt == 0.0) continue;
        bcr.at(i, k) += wgt;
        bcl.at(k + 1, j) += wgt;
      }
    }
  }
  return marg;
}

// Max-product chart with backpointers. Candidates are scanned with strict
// improvement in a fixed order (split k ascending, root r ascending), which
// pins tie-breaking deterministically.
struct DecodeChart {
  int n;
  Table cr, cl, ir, il;
  BpTable kcr, kcl, kir, kil;
  std::vector<Index> head;

  DecodeChart(const ArcScores& s, const Masks* m)
      : n(s.size()),
        cr(n, kMaskedScore),
        cl(n, kMaskedScore),
        ir(n, kMaskedScore),
        il(n, kMaskedScore),
        kcr(n),
        kcl(n),
        kir(n),
        kil(n),
        head(n + 1, -1) {
    for (int i = 1; i <= n; ++i) cr.at(i, i) = cl.at(i, i) = 0.0;
    for (int w = 1; w < n; ++w) {
      for (int i = 1; i + w <= n; ++i) {
        const int j = i + w;
        double best = kMaskedScore;
        int best_k = -1;
        for (int k = i; k < j; ++k) {
          const double v = InsideChart::sum2(cr.at(i, k), cl.at(k + 1, j));
          if (!is_masked(v) && (best_k < 0 || v > best)) {
            best = v;
            best_k = k;
          }
        }
        if (best_k >= 0) {
          if (!is_masked(s(i, j))) {
            ir.at(i, j) = s(i, j) + best;
            kir.at(i, j) = best_k;
          }
          if (!is_masked(s(j, i))) {
            il.at(i, j) = s(j, i) + best;
            kil.at(i, j) = best_k;
          }
        }
        if (!m || m->complete_right_ok(i, j)) {
          for (int k = i + 1; k <= j; ++k) {
            if (m && !m->comb_right_ok(i, k, j)) continue;
            const double v = InsideChart::sum2(ir.at(i, k), cr.at(k, j));
            if (!is_masked(v) && (kcr.at(i, j) < 0 || v > cr.at(i, j))) {
              cr.at(i, j) = v;
              kcr.at(i, j) = k;
            }
          }
        }
        if (!m || m->complete_left_ok(i, j)) {
          for (int k = i; k < j; ++k) {
            if (m && !m->comb_left_ok(i, k, j)) continue;
            const double v = InsideChart::sum2(cl.at(i, k), il.at(k, j));
            if (!is_masked(v) && (kcl.at(i, j) < 0 || v > cl.at(i, j))) {
              cl.at(i, j) = v;
              kcl.at(i, j) = k;
            }
          }
        }
      }
    }
    double best = kMaskedScore;
    int best_r = -1;
    for (int r = 1; r <= n; ++r) {
      if (is_masked(s(0, r))) continue;
      const double v = InsideChart::sum2(InsideChart::sum2(cl.at(1, r), cr.at(r, n)), s(0, r));
      if (!is_masked(v) && (best_r < 0 || v > best)) {
        best = v;
        best_r = r;
      }
    }
    if (best_r < 0) throw NoValidTreeError("no valid tree under the given masks");
    head[best_r] = 0;
    trace_cl(1, best_r);
    trace_cr(best_r, n);
  }

  void trace_cr(int i, int j) {
    if (i == j) return;
    const int k = kcr.at(i, j);
    trace_ir(i, k);
    trace_cr(k, j);
  }
  void trace_cl(int i, int j) {
    if (i == j) return;
    const int k = kcl.at(i, j);
    trace_cl(i, k);
    trace_il(k, j);
  }
  void trace_ir(int i, int j) {
    head[j] = i;
    const int k = kir.at(i, j);
    trace_cr(i, k);
    trace_cl(k + 1, j);
  }
  void trace_il(int i, int j) {
    head[i] = j;
    const int k = kil.at(i, j);
    trace_cr(i, k);
    trace_cl(k + 1, j);
  }
};

}  // namespace

std::vector<Index> eisner_decode(const ArcScores& scores) {
  return DecodeChart(scores, nullptr).head;
}

std::vector<Index> constrained_eisner(const ArcScores& scores, const ForestSpec& spec,
                                      ConstraintFlags flags) {
  const ArcScores masked = spec.mask(scores);
  Masks m(spec, flags);
  return DecodeChart(masked, &m).head;
}

double inside(const ArcScores& scores) {
  InsideChart f(scores, nullptr);
  if (is_masked(f.log_z)) throw NoValidTreeError("no tree has nonzero weight");
  return f.log_z;
}

double constrained_inside(const ArcScores& scores, const ForestSpec& spec,
                          ConstraintFlags flags) {
  const ArcScores masked = spec.mask(scores);
  Masks m(spec, flags);
  InsideChart f(masked, &m);
  if (is_masked(f.log_z)) throw NoValidTreeError("empty forest");
  return f.log_z;
}

ArcScores arc_marginals(const ArcScores& scores, const ForestSpec* spec,
                        ConstraintFlags flags) {
  if (!spec) {
    InsideChart f(scores, nullptr);
    if (is_masked(f.log_z)) throw NoValidTreeError("no tree has nonzero weight");
    return inside_backward(scores, nullptr, f);
  }
  const ArcScores masked = spec->mask(scores);
  Masks m(*spec, flags);
  InsideChart f(masked, &m);
  if (is_masked(f.log_z)) throw NoValidTreeError("empty forest");
  return inside_backward(masked, &m, f);
}

double tree_score(const std::vector<Index>& head, const ArcScores& scores) {
  double total = 0.0;
  for (Index mdf = 1; mdf < static_cast<Index>(head.size()); ++mdf) {
    const double v = scores(head[mdf], mdf);
    if (is_masked(v)) return kMaskedScore;
    total += v;
  }
  return total;
}

namespace {

// Coarse-to-fine chart: hat tables hold intra-word spans, plain tables
// inter-word spans. Trivial spans are intra-only. Candidate order per cell:
// hat combinations before plain ones at each split, k ascending.
struct C2fChart {
  int n;
  bool max_mode;
  bool exclude;
  Table crh, clh, cr, cl, irh, ilh, ir, il;
  // Backpointers: split k plus a small combo code.
  BpTable k_crh, k_clh, k_cr, k_cl, k_irh, k_ilh, k_ir, k_il;
  BpTable c_cr, c_cl, c_ir, c_il;  // combo codes for plain cells
  std::vector<Index> head;
  std::vector<ArcRole> role;
  double log_z = kMaskedScore;
  int goal_r = -1, goal_combo = -1;
  double goal_best = kMaskedScore;

  C2fChart(const ArcScores& si, const ArcScores& se, bool max_mode_, bool exclude_)
      : n(si.size()),
        max_mode(max_mode_),
        exclude(exclude_),
        crh(n, kMaskedScore),
        clh(n, kMaskedScore),
        cr(n, kMaskedScore),
        cl(n, kMaskedScore),
        irh(n, kMaskedScore),
        ilh(n, kMaskedScore),
        ir(n, kMaskedScore),
        il(n, kMaskedScore),
        k_crh(n),
        k_clh(n),
        k_cr(n),
        k_cl(n),
        k_irh(n),
        k_ilh(n),
        k_ir(n),
        k_il(n),
        c_cr(n),
        c_cl(n),
        c_ir(n),
        c_il(n),
        head(n + 1, -1),
        role(n + 1, ArcRole::kInter) {
    for (int i = 1; i <= n; ++i) crh.at(i, i) = clh.at(i, i) = 0.0;
    for (int w = 1; w < n; ++w)
      for (int i = 1; i + w <= n; ++i) fill(i, i + w, si, se);
    goal(se);
  }

  void acc(double v, double& cell, int k, int combo, BpTable* bk, BpTable* bc, int i, int j) {
    if (is_masked(v)) return;
    if (max_mode) {
      if (bk->at(i, j) < 0 || v > cell) {
        cell = v;
        bk->at(i, j) = k;
        if (bc) bc->at(i, j) = combo;
      }
    } else {
      cell = log_add(cell, v);
    }
  }

  void fill(int i, int j, const ArcScores& si, const ArcScores& se) {
    auto s2 = InsideChart::sum2;
    // Incomplete intra: hat children only.
    for (int k = i; k < j; ++k) {
      const double span = s2(crh.at(i, k), clh.at(k + 1, j));
      if (is_masked(span)) continue;
      if (!is_masked(si(i, j))) acc(si(i, j) + span, irh.at(i, j), k, 0, &k_irh, nullptr, i, j);
      if (!is_masked(si(j, i))) acc(si(j, i) + span, ilh.at(i, j), k, 0, &k_ilh, nullptr, i, j);
    }
    // Incomplete inter: all four child combinations.
    for (int k = i; k < j; ++k) {
      const double lefts[2] = {crh.at(i, k), cr.at(i, k)};
      const double rights[2] = {clh.at(k + 1, j), cl.at(k + 1, j)};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double span = s2(lefts[a], rights[b]);
          if (is_masked(span)) continue;
          const int combo = a * 2 + b;
          if (!is_masked(se(i, j))) acc(se(i, j) + span, ir.at(i, j), k, combo, &k_ir, &c_ir, i, j);
          if (!is_masked(se(j, i))) acc(se(j, i) + span, il.at(i, j), k, combo, &k_il, &c_il, i, j);
        }
      }
    }
    // Complete intra.
    for (int k = i + 1; k <= j; ++k)
      acc(s2(irh.at(i, k), crh.at(k, j)), crh.at(i, j), k, 0, &k_crh, nullptr, i, j);
    for (int k = i; k < j; ++k)
      acc(s2(clh.at(i, k), ilh.at(k, j)), clh.at(i, j), k, 0, &k_clh, nullptr, i, j);
    // Complete inter; combo 0 = Comb(WI,WE), dropped under root-as-head.
    for (int k = i + 1; k <= j; ++k) {
      if (!exclude) acc(s2(irh.at(i, k), cr.at(k, j)), cr.at(i, j), k, 0, &k_cr, &c_cr, i, j);
      acc(s2(ir.at(i, k), crh.at(k, j)), cr.at(i, j), k, 1, &k_cr, &c_cr, i, j);
      acc(s2(ir.at(i, k), cr.at(k, j)), cr.at(i, j), k, 2, &k_cr, &c_cr, i, j);
    }
    for (int k = i; k < j; ++k) {
      if (!exclude) acc(s2(cl.at(i, k), ilh.at(k, j)), cl.at(i, j), k, 0, &k_cl, &c_cl, i, j);
      acc(s2(clh.at(i, k), il.at(k, j)), cl.at(i, j), k, 1, &k_cl, &c_cl, i, j);
      acc(s2(cl.at(i, k), il.at(k, j)), cl.at(i, j), k, 2, &k_cl, &c_cl, i, j);
    }
  }

  void goal(const ArcScores& se) {
    auto s2 = InsideChart::sum2;
    for (int r = 1; r <= n; ++r) {
      if (is_masked(se(0, r))) continue;
      const double lefts[2] = {clh.at(1, r), cl.at(1, r)};
      const double rights[2] = {crh.at(r, n), cr.at(r, n)};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double v = s2(s2(lefts[a], rights[b]), se(0, r));
          if (is_masked(v)) continue;
          if (max_mode) {
            if (goal_r < 0 || v > goal_best) {
              goal_best = v;
              goal_r = r;
              goal_combo = a * 2 + b;
            }
          } else {
            log_z = log_add(log_z, v);
          }
        }
      }
    }
  }

  void backtrace() {
    if (goal_r < 0) throw NoValidTreeError("no coarse-to-fine derivation");
    head[goal_r] = 0;
    role[goal_r] = ArcRole::kInter;
    trace_cl(goal_combo / 2 == 0, 1, goal_r);
    trace_cr(goal_combo % 2 == 0, goal_r, n);
  }

  void trace_cr(bool hat, int i, int j) {
    if (i == j) return;
    if (hat) {
      const int k = k_crh.at(i, j);
      trace_ir(true, i, k);
      trace_cr(true, k, j);
      return;
    }
    const int k = k_cr.at(i, j), combo = c_cr.at(i, j);
    trace_ir(combo == 0, i, k);
    trace_cr(combo == 1, k, j);
  }
  void trace_cl(bool hat, int i, int j) {
    if (i == j) return;
    if (hat) {
      const int k = k_clh.at(i, j);
      trace_cl(true, i, k);
      trace_il(true, k, j);
      return;
    }
    const int k = k_cl.at(i, j), combo = c_cl.at(i, j);
    trace_cl(combo == 1, i, k);
    trace_il(combo == 0, k, j);
  }
  void trace_ir(bool hat, int i, int j) {
    head[j] = i;
    role[j] = hat ? ArcRole::kIntra : ArcRole::kInter;
    const int k = hat ? k_irh.at(i, j) : k_ir.at(i, j);
    const int combo = hat ? 0 : c_ir.at(i, j);
    trace_cr(hat || combo / 2 == 0, i, k);
    trace_cl(hat || combo % 2 == 0, k + 1, j);
  }
  void trace_il(bool hat, int i, int j) {
    head[i] = j;
    role[i] = hat ? ArcRole::kIntra : ArcRole::kInter;
    const int k = hat ? k_ilh.at(i, j) : k_il.at(i, j);
    const int combo = hat ? 0 : c_il.at(i, j);
    trace_cr(hat || combo / 2 == 0, i, k);
    trace_cl(hat || combo % 2 == 0, k + 1, j);
  }
};

C2fArcScores sanitize(const C2fArcScores& scores) {
  C2fArcScores out = scores;
  out.mask_intra_root();
  return out;
}

// Adjoint of the coarse-to-fine inside pass; mirrors C2fChart::fill.
struct C2fBackward {
  const C2fChart& f;
  const ArcScores& si;
  const ArcScores& se;
  int n;
  Table bcrh, bclh, bcr, bcl, birh, bilh, bir, bil;
  C2fMarginals marg;

  C2fBackward(const C2fChart& f_, const ArcScores& si_, const ArcScores& se_)
      : f(f_),
        si(si_),
        se(se_),
        n(f_.n),
        bcrh(n, 0.0),
        bclh(n, 0.0),
        bcr(n, 0.0),
        bcl(n, 0.0),
        birh(n, 0.0),
        bilh(n, 0.0),
        bir(n, 0.0),
        bil(n, 0.0) {
    marg.intra = ArcScores(n, 0.0);
    marg.inter = ArcScores(n, 0.0);
    for (auto& v : marg.intra.data()) v = 0.0;
    for (auto& v : marg.inter.data()) v = 0.0;

    auto s2 = InsideChart::sum2;
    for (int r = 1; r <= n; ++r) {
      if (is_masked(se(0, r))) continue;
      const double lefts[2] = {f.clh.at(1, r), f.cl.at(1, r)};
      const double rights[2] = {f.crh.at(r, n), f.cr.at(r, n)};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double v = s2(s2(lefts[a], rights[b]), se(0, r));
          if (is_masked(v)) continue;
          const double p = std::exp(v - f.log_z);
          marg.inter(0, r) += p;
          (a == 0 ? bclh : bcl).at(1, r) += p;
          (b == 0 ? bcrh : bcr).at(r, n) += p;
        }
      }
    }

    for (int w = n - 1; w >= 1; --w) {
      for (int i = 1; i + w <= n; ++i) {
        const int j = i + w;
        back_complete(i, j);
        back_incomplete(i, j);
      }
    }
  }

  void back_complete(int i, int j) {
    auto s2 = InsideChart::sum2;
    if (bcrh.at(i, j) != 0.0 && !is_masked(f.crh.at(i, j))) {
      const double a = bcrh.at(i, j);
      for (int k = i + 1; k <= j; ++k) {
        const double part = s2(f.irh.at(i, k), f.crh.at(k, j));
        if (is_masked(part)) continue;
        const double wgt = a * std::exp(part - f.crh.at(i, j));
        birh.at(i, k) += wgt;
        bcrh.at(k, j) += wgt;
      }
    }
    if (bcr.at(i, j) != 0.0 && !is_masked(f.cr.at(i, j))) {
      const double a = bcr.at(i, j);
      for (int k = i + 1; k <= j; ++k) {
        if (!f.exclude) {
          const double part = s2(f.irh.at(i, k), f.cr.at(k, j));
          if (!is_masked(part)) {
            const double wgt = a * std::exp(part - f.cr.at(i, j));
            birh.at(i, k) += wgt;
            bcr.at(k, j) += wgt;
          }
        }
        const double p1 = s2(f.ir.at(i, k), f.crh.at(k, j));
        if (!is_masked(p1)) {
          const double wgt = a * std::exp(p1 - f.cr.at(i, j));
          bir.at(i, k) += wgt;
          bcrh.at(k, j) += wgt;
        }
        const double p2 = s2(f.ir.at(i, k), f.cr.at(k, j));
        if (!is_masked(p2)) {
          const double wgt = a * std::exp(p2 - f.cr.at(i, j));
          bir.at(i, k) += wgt;
          bcr.at(k, j) += wgt;
        }
      }
    }
    if (bclh.at(i, j) != 0.0 && !is_masked(f.clh.at(i, j))) {
      const double a = bclh.at(i, j);
      for (int k = i; k < j; ++k) {
        const double part = s2(f.clh.at(i, k), f.ilh.at(k, j));
        if (is_masked(part)) continue;
        const double wgt = a * std::exp(part - f.clh.at(i, j));
        bclh.at(i, k) += wgt;
        bilh.at(k, j) += wgt;
      }
    }
    if (bcl.at(i, j) != 0.0 && !is_masked(f.cl.at(i, j))) {
      const double a = bcl.at(i, j);
      for (int k = i; k < j; ++k) {
        if (!f.exclude) {
          const double part = s2(f.cl.at(i, k), f.ilh.at(k, j));
          if (!is_masked(part)) {
            const double wgt = a * std::exp(part - f.cl.at(i, j));
            bcl.at(i, k) += wgt;
            bilh.at(k, j) += wgt;
          }
        }
        const double p1 = s2(f.clh.at(i, k), f.il.at(k, j));
        if (!is_masked(p1)) {
          const double wgt = a * std::exp(p1 - f.cl.at(i, j));
          bclh.at(i, k) += wgt;
          bil.at(k, j) += wgt;
        }
        const double p2 = s2(f.cl.at(i, k), f.il.at(k, j));
        if (!is_masked(p2)) {
          const double wgt = a * std::exp(p2 - f.cl.at(i, j));
          bcl.at(i, k) += wgt;
          bil.at(k, j) += wgt;
        }
      }
    }
  }

  void back_incomplete(int i, int j) {
    auto s2 = InsideChart::sum2;
    if (birh.at(i, j) != 0.0 && !is_masked(f.irh.at(i, j))) {
      const double a = birh.at(i, j);
      marg.intra(i, j) += a;
      const double span = f.irh.at(i, j) - si(i, j);
      for (int k = i; k < j; ++k) {
        const double part = s2(f.crh.at(i, k), f.clh.at(k + 1, j));
        if (is_masked(part)) continue;
        const double wgt = a * std::exp(part - span);
        bcrh.at(i, k) += wgt;
        bclh.at(k + 1, j) += wgt;
      }
    }
    if (bilh.at(i, j) != 0.0 && !is_masked(f.ilh.at(i, j))) {
      const double a = bilh.at(i, j);
      marg.intra(j, i) += a;
      const double span = f.ilh.at(i, j) - si(j, i);
      for (int k = i; k < j; ++k) {
        const double part = s2(f.crh.at(i, k), f.clh.at(k + 1, j));
        if (is_masked(part)) continue;
        const double wgt = a * std::exp(part - span);
        bcrh.at(i, k) += wgt;
        bclh.at(k + 1, j) += wgt;
      }
    }
    if (bir.at(i, j) != 0.0 && !is_masked(f.ir.at(i, j))) {
      const double a = bir.at(i, j);
      marg.inter(i, j) += a;
      const double base = f.ir.at(i, j) - se(i, j);
      spread_inter(a, base, i, j);
    }
    if (bil.at(i, j) != 0.0 && !is_masked(f.il.at(i, j))) {
      const double a = bil.at(i, j);
      marg.inter(j, i) += a;
      const double base = f.il.at(i, j) - se(j, i);
      spread_inter(a, base, i, j);
    }
  }

  // Inter incomplete items share the same four-way child decomposition.
  void spread_inter(double a, double base, int i, int j) {
    auto s2 = InsideChart::sum2;
    for (int k = i; k < j; ++k) {
      const double lefts[2] = {f.crh.at(i, k), f.cr.at(i, k)};
      const double rights[2] = {f.clh.at(k + 1, j), f.cl.at(k + 1, j)};
      for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
          const double part = s2(lefts[x], rights[y]);
          if (is_masked(part)) continue;
          const double wgt = a * std::exp(part - base);
          (x == 0 ? bcrh : bcr).at(i, k) += wgt;
          (y == 0 ? bclh : bcl).at(k + 1, j) += wgt;
        }
      }
    }
  }
};

}  // namespace

C2fTree c2f_eisner(const C2fArcScores& scores, bool exclude_root_as_head) {
  const C2fArcScores s = sanitize(scores);
  C2fChart chart(s.intra, s.inter, /*max_mode=*/true, exclude_root_as_head);
  chart.backtrace();
  return {chart.head, chart.role};
}

double c2f_inside(const C2fArcScores& scores, bool exclude_root_as_head) {
  const C2fArcScores s = sanitize(scores);
  C2fChart chart(s.intra, s.inter, /*max_mode=*/false, exclude_root_as_head);
  if (is_masked(chart.log_z)) throw NoValidTreeError("no coarse-to-fine derivation");
  return chart.log_z;
}

C2fMarginals c2f_arc_marginals(const C2fArcScores& scores, bool exclude_root_as_head) {
  const C2fArcScores s = sanitize(scores);
  C2fChart chart(s.intra, s.inter, /*max_mode=*/false, exclude_root_as_head);
  if (is_masked(chart.log_z)) throw NoValidTreeError("no coarse-to-fine derivation");
  C2fBackward backward(chart, s.intra, s.inter);
  return std::move(backward.marg);
}

ArcScores merge_c2f_scores(const C2fArcScores& scores, const ForestSpec& spec) {
  const int n = scores.size();
  ArcScores out(n, kMaskedScore);
  for (Index h = 0; h <= n; ++h) {
    for (Index m = 1; m <= n; ++m) {
      if (h == m || !spec.admissible(h, m)) continue;
      const bool intra = h != 0 && spec.word_of[h] == spec.word_of[m];
      out(h, m) = intra ? scores.intra(h, m) : scores.inter(h, m);
    }
  }
  return out;
}

}  // namespace chardep
