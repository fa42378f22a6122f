#include "chardep/convert.hpp"

#include <algorithm>
#include <numeric>

namespace chardep {

ForestSpec word_tree_to_forest(const WordTree& gold) {
  if (!validate_word_tree(gold))
    throw std::invalid_argument("gold word tree is not a valid projective tree");
  return ForestSpec(gold.seg, gold.whead);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n + 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

WordTree recover_word_tree(const CharTree& tree) {
  const int n = tree.size();
  if (!validate_char_tree(tree))
    throw std::invalid_argument("input is not a valid char tree");

  std::vector<std::pair<Index, Index>> intra_arcs;
  for (Index m = 1; m <= n; ++m) {
    if (tree.label[m] != LabelSet::kIntra) continue;
    if (tree.head[m] == 0)
      throw IllegalStructureError("ROOT arc labeled intra", {{0, m}});
    intra_arcs.emplace_back(tree.head[m], m);
  }

  UnionFind uf(n);
  for (auto [h, m] : intra_arcs) uf.unite(h, m);

  // Component intervals; contiguity is what makes a component a word.
  std::vector<Index> lo(n + 1), hi(n + 1);
  for (Index c = 1; c <= n; ++c) lo[c] = hi[c] = c;
  for (Index c = 1; c <= n; ++c) {
    int r = uf.find(c);
    lo[r] = std::min(lo[r], c);
    hi[r] = std::max(hi[r], c);
  }
  std::vector<std::pair<Index, Index>> offending;
  for (auto [h, m] : intra_arcs) {
    const Index a = std::min(h, m), b = std::max(h, m);
    for (Index c = a + 1; c < b; ++c)
      if (uf.find(c) != uf.find(h)) {
        offending.emplace_back(h, m);
        break;
      }
  }
  if (!offending.empty())
    throw IllegalStructureError("intra-word arc spans foreign material", offending);
  // A contiguity breach always pins at least one covering arc; the check
  // below only guards impossible states.
  for (Index c = 1; c <= n; ++c) {
    const int r = uf.find(c);
    for (Index d = lo[r]; d <= hi[r]; ++d)
      if (uf.find(d) != r)
        throw IllegalStructureError("non-contiguous intra component", intra_arcs);
  }

  // Assemble words left to right.
  std::vector<int> word_of(n + 1, 0);
  Segmentation seg;
  for (Index c = 1; c <= n;) {
    const int r = uf.find(c);
    seg.spans.push_back({lo[r], hi[r]});
    const int w = seg.num_words();
    for (Index d = lo[r]; d <= hi[r]; ++d) word_of[d] = w;
    c = hi[r] + 1;
  }

  // The single character of each word whose head lies outside carries the
  // word's attachment and label.
  WordTree out(seg);
  std::vector<Index> top(seg.num_words() + 1, -1);
  for (Index c = 1; c <= n; ++c) {
    if (tree.head[c] != 0 && word_of[tree.head[c]] == word_of[c]) continue;
    if (top[word_of[c]] != -1)
      throw IllegalStructureError("word has multiple external heads", intra_arcs);
    top[word_of[c]] = c;
  }
  for (int w = 1; w <= seg.num_words(); ++w) {
    const Index t = top[w];
    const Index h = tree.head[t];
    out.whead[w] = h == 0 ? 0 : word_of[h];
    out.wlabel[w] = tree.label[t];
  }
  return out;
}

WordTree recover_with_fallback(const CharTree& tree, const LabelScores* scores,
                               int fallback_label) {
  CharTree cur = tree;
  while (true) {
    try {
      return recover_word_tree(cur);
    } catch (const IllegalStructureError& e) {
      if (e.arcs.empty()) throw;
      // Outermost offending arc first; relabel just one and retry.
      auto widest = e.arcs.front();
      for (auto arc : e.arcs) {
        const int w = std::abs(arc.second - arc.first);
        const int best = std::abs(widest.second - widest.first);
        if (w > best || (w == best && arc < widest)) widest = arc;
      }
      const Index m = widest.second;
      int pick = fallback_label;
      if (scores) {
        pick = -1;
        for (int l = 0; l < scores->num_labels(); ++l) {
          if (l == LabelSet::kIntra) continue;
          if (pick < 0 || (*scores)(cur.head[m], m, l) > (*scores)(cur.head[m], m, pick))
            pick = l;
        }
      }
      if (pick <= LabelSet::kIntra)
        throw std::invalid_argument("fallback label must be syntactic");
      cur.label[m] = pick;
    }
  }
}

IntraStructure pseudo_structure(Span word_span, PseudoDirection direction) {
  if (word_span.begin > word_span.end)
    throw std::invalid_argument("empty word span");
  const int len = word_span.length();
  IntraStructure s;
  s.head.resize(len);
  for (int p = 1; p <= len; ++p) {
    if (direction == PseudoDirection::kLeftward)
      s.head[p - 1] = p == len ? 0 : p + 1;
    else
      s.head[p - 1] = p == 1 ? 0 : p - 1;
  }
  return s;
}

ForestSpec narrow_forest(const ForestSpec& spec,
                         const std::map<int, IntraStructure>& fixed_structures) {
  ForestSpec out = spec;
  for (const auto& [w, st] : fixed_structures) {
    if (w < 1 || w > spec.num_words())
      throw std::invalid_argument("fixed structure for nonexistent word");
    if (st.length() != spec.seg.spans[w - 1].length())
      throw std::invalid_argument("fixed structure does not fit its word span");
    if (!st.valid())
      throw std::invalid_argument("fixed structure is not a single-root tree");
    out.fixed[w] = st;
  }
  return out;
}

std::vector<IntraStructure> extract_intra_structures(
    const std::vector<Index>& head, const Segmentation& seg) {
  std::vector<IntraStructure> out;
  out.reserve(seg.num_words());
  for (const Span& sp : seg.spans) {
    IntraStructure st;
    st.head.resize(sp.length());
    for (Index c = sp.begin; c <= sp.end; ++c) {
      const Index h = head[c];
      st.head[c - sp.begin] = (h >= sp.begin && h <= sp.end) ? h - sp.begin + 1 : 0;
    }
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace chardep
