#include "chardep/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace chardep {
namespace oracle {

namespace {

// Partial assignment: (modifier -> head) pairs covering a span's interior.
using Arcs = std::vector<std::pair<Index, Index>>;

// Enumerates span items exactly as the Eisner grammar derives them, which
// yields each projective tree once.
struct Enumerator {
  int n;
  std::map<std::tuple<int, int, int>, std::vector<Arcs>> memo;

  enum Kind { CR, CL, IR, IL };

  const std::vector<Arcs>& items(Kind kind, int i, int j) {
    auto key = std::make_tuple(static_cast<int>(kind), i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<Arcs> out;
    switch (kind) {
      case CR:
        if (i == j) {
          out.push_back({});
        } else {
          for (int k = i + 1; k <= j; ++k) combine(out, items(IR, i, k), items(CR, k, j));
        }
        break;
      case CL:
        if (i == j) {
          out.push_back({});
        } else {
          for (int k = i; k < j; ++k) combine(out, items(CL, i, k), items(IL, k, j));
        }
        break;
      case IR:
        for (int k = i; k < j; ++k)
          combine(out, items(CR, i, k), items(CL, k + 1, j), std::pair<Index, Index>{j, i});
        break;
      case IL:
        for (int k = i; k < j; ++k)
          combine(out, items(CR, i, k), items(CL, k + 1, j), std::pair<Index, Index>{i, j});
        break;
    }
    return memo.emplace(key, std::move(out)).first->second;
  }

  static void combine(std::vector<Arcs>& out, const std::vector<Arcs>& a,
                      const std::vector<Arcs>& b,
                      std::pair<Index, Index> arc = {-1, -1}) {
    for (const Arcs& x : a) {
      for (const Arcs& y : b) {
        Arcs merged = x;
        merged.insert(merged.end(), y.begin(), y.end());
        if (arc.first >= 0) merged.push_back(arc);
        out.push_back(std::move(merged));
      }
    }
  }
};

}  // namespace

std::vector<std::vector<Index>> enumerate_projective(int n) {
  if (n < 1 || n > kMaxN)
    throw std::invalid_argument("enumerate_projective supports 1 <= n <= 9");
  Enumerator e{n, {}};
  std::vector<std::vector<Index>> trees;
  for (Index r = 1; r <= n; ++r) {
    const auto& left = e.items(Enumerator::CL, 1, r);
    const auto& right = e.items(Enumerator::CR, r, n);
    for (const Arcs& a : left) {
      for (const Arcs& b : right) {
        std::vector<Index> head(n + 1, -1);
        head[r] = 0;
        for (auto [m, h] : a) head[m] = h;
        for (auto [m, h] : b) head[m] = h;
        trees.push_back(std::move(head));
      }
    }
  }
  return trees;
}

bool single_root_ok(const std::vector<Index>& head, const ForestSpec& spec) {
  for (int w = 1; w <= spec.num_words(); ++w) {
    const Span& sp = spec.seg.spans[w - 1];
    int external = 0;
    for (Index c = sp.begin; c <= sp.end; ++c)
      if (head[c] < sp.begin || head[c] > sp.end) ++external;
    if (external != 1) return false;
  }
  return true;
}

bool root_as_head_ok(const std::vector<Index>& head, const ForestSpec& spec) {
  const auto& word_of = spec.word_of;
  for (Index m = 1; m < static_cast<Index>(head.size()); ++m) {
    const Index h = head[m];
    if (h == 0 || word_of[h] == word_of[m]) continue;
    // h heads a cross-word arc: h itself must be externally headed.
    if (head[h] != 0 && word_of[head[h]] == word_of[h]) return false;
  }
  return true;
}

bool compatible_with(const std::vector<Index>& head, const ForestSpec& spec) {
  const int n = static_cast<int>(head.size()) - 1;
  if (n != spec.num_chars()) return false;
  if (!single_root_ok(head, spec) || !root_as_head_ok(head, spec)) return false;

  // Root characters per word.
  std::vector<Index> root_char(spec.num_words() + 1, -1);
  for (int w = 1; w <= spec.num_words(); ++w) {
    const Span& sp = spec.seg.spans[w - 1];
    for (Index c = sp.begin; c <= sp.end; ++c)
      if (head[c] < sp.begin || head[c] > sp.end) root_char[w] = c;
  }
  for (int w = 1; w <= spec.num_words(); ++w) {
    const Index r = root_char[w];
    const Index h = head[r];
    if (spec.has_whead()) {
      if (spec.whead[w] == 0) {
        if (h != 0) return false;
      } else if (h != root_char[spec.whead[w]]) {
        return false;
      }
    } else if (h != 0 && root_char[spec.word_of[h]] != h) {
      return false;
    }
  }
  for (const auto& [w, st] : spec.fixed) {
    const Span& sp = spec.seg.spans[w - 1];
    for (Index c = sp.begin; c <= sp.end; ++c) {
      const int rel = st.head[c - sp.begin];
      const Index want = rel == 0 ? -1 : sp.begin + rel - 1;
      if (rel == 0) {
        if (c != root_char[w]) return false;
      } else if (head[c] != want) {
        return false;
      }
    }
  }
  return true;
}

std::vector<std::vector<Index>> filter_compatible(
    const std::vector<std::vector<Index>>& trees, const ForestSpec& spec) {
  std::vector<std::vector<Index>> out;
  for (const auto& t : trees)
    if (compatible_with(t, spec)) out.push_back(t);
  return out;
}

double brute_logZ(const std::vector<std::vector<Index>>& trees,
                  const ArcScores& scores) {
  if (trees.empty()) throw std::invalid_argument("brute_logZ over empty tree list");
  double z = kMaskedScore;
  for (const auto& t : trees) {
    const double s = tree_score(t, scores);
    if (is_masked(s)) continue;
    if (is_masked(z)) {
      z = s;
    } else {
      const double hi = std::max(z, s), lo = std::min(z, s);
      z = hi + std::log1p(std::exp(lo - hi));
    }
  }
  return z;
}

BruteMax brute_argmax(const std::vector<std::vector<Index>>& trees,
                      const ArcScores& scores) {
  if (trees.empty()) throw std::invalid_argument("brute_argmax over empty tree list");
  BruteMax best;
  for (const auto& t : trees) {
    const double s = tree_score(t, scores);
    if (is_masked(s)) continue;
    if (best.head.empty() || s > best.score) {
      best.score = s;
      best.head = t;
    }
  }
  return best;
}

ArcScores brute_marginals(const std::vector<std::vector<Index>>& trees,
                          const ArcScores& scores) {
  const double log_z = brute_logZ(trees, scores);
  ArcScores marg(scores.size(), 0.0);
  for (auto& v : marg.data()) v = 0.0;
  for (const auto& t : trees) {
    const double s = tree_score(t, scores);
    if (is_masked(s)) continue;
    const double p = std::exp(s - log_z);
    for (Index m = 1; m < static_cast<Index>(t.size()); ++m) marg(t[m], m) += p;
  }
  return marg;
}

bool c2f_legal(const std::vector<Index>& head, const std::vector<ArcRole>& role,
               bool exclude_root_as_head) {
  const int n = static_cast<int>(head.size()) - 1;
  for (Index m = 1; m <= n; ++m)
    if (head[m] == 0 && role[m] != ArcRole::kInter) return false;
  for (Index m = 1; m <= n; ++m) {
    if (role[m] != ArcRole::kIntra) continue;
    const Index a = std::min(head[m], m), b = std::max(head[m], m);
    // Everything inside the closed interval of an intra arc is intra.
    for (Index m2 = 1; m2 <= n; ++m2) {
      const Index c = std::min(head[m2], m2), d = std::max(head[m2], m2);
      if (a <= c && d <= b && role[m2] != ArcRole::kIntra) return false;
    }
  }
  if (exclude_root_as_head) {
    for (Index m = 1; m <= n; ++m) {
      if (role[m] == ArcRole::kInter && head[m] != 0 &&
          role[head[m]] == ArcRole::kIntra)
        return false;
    }
  }
  return true;
}

BruteC2f brute_c2f(const std::vector<std::vector<Index>>& trees,
                   const C2fArcScores& scores, bool exclude_root_as_head) {
  BruteC2f best;
  for (const auto& head : trees) {
    const int n = static_cast<int>(head.size()) - 1;
    std::vector<ArcRole> role(n + 1, ArcRole::kInter);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      for (Index m = 1; m <= n; ++m)
        role[m] = (mask >> (m - 1)) & 1 ? ArcRole::kIntra : ArcRole::kInter;
      if (!c2f_legal(head, role, exclude_root_as_head)) continue;
      double s = 0.0;
      bool dead = false;
      for (Index m = 1; m <= n && !dead; ++m) {
        const double v = role[m] == ArcRole::kIntra ? scores.intra(head[m], m)
                                                    : scores.inter(head[m], m);
        if (is_masked(v))
          dead = true;
        else
          s += v;
      }
      if (dead) continue;
      ++best.derivations;
      if (is_masked(best.log_z)) {
        best.log_z = s;
      } else {
        const double hi = std::max(best.log_z, s), lo = std::min(best.log_z, s);
        best.log_z = hi + std::log1p(std::exp(lo - hi));
      }
      if (best.head.empty() || s > best.score) {
        best.score = s;
        best.head = head;
        best.role = role;
      }
    }
  }
  return best;
}

}  // namespace oracle
}  // namespace chardep
