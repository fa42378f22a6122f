#include "chardep/metrics.hpp"

#include <algorithm>
#include <tuple>

namespace chardep {

PRF MatchCounts::prf() const {
  PRF out;
  out.precision = pred_total ? double(matched) / pred_total : 0.0;
  out.recall = gold_total ? double(matched) / gold_total : 0.0;
  out.f1 = (out.precision + out.recall) > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

MatchCounts seg_match_counts(const Segmentation& gold, const Segmentation& pred) {
  if (gold.num_chars() != pred.num_chars())
    throw std::invalid_argument("segmentation length mismatch");
  MatchCounts c;
  c.gold_total = gold.num_words();
  c.pred_total = pred.num_words();
  size_t gi = 0, pi = 0;
  while (gi < gold.spans.size() && pi < pred.spans.size()) {
    if (gold.spans[gi] == pred.spans[pi]) {
      ++c.matched;
      ++gi;
      ++pi;
    } else if (gold.spans[gi].end < pred.spans[pi].end) {
      ++gi;
    } else {
      ++pi;
    }
  }
  return c;
}

PRF seg_f1(const Segmentation& gold, const Segmentation& pred) {
  return seg_match_counts(gold, pred).prf();
}

namespace {

// Word-level arc keyed by spans so matching survives segmentation errors.
// Head span (0,0) encodes the ROOT attachment.
using SpanArc = std::tuple<Index, Index, Index, Index, int>;

std::vector<SpanArc> span_arcs(const WordTree& t, bool labeled,
                               const std::set<int>& punct_labels) {
  std::vector<SpanArc> arcs;
  for (int w = 1; w <= t.num_words(); ++w) {
    if (punct_labels.count(t.wlabel[w])) continue;
    const Span mod = t.seg.spans[w - 1];
    const Span head = t.whead[w] == 0 ? Span{0, 0} : t.seg.spans[t.whead[w] - 1];
    arcs.emplace_back(mod.begin, mod.end, head.begin, head.end,
                      labeled ? t.wlabel[w] : -1);
  }
  std::sort(arcs.begin(), arcs.end());
  return arcs;
}

}  // namespace

MatchCounts dep_match_counts(const WordTree& gold, const WordTree& pred,
                             bool labeled, const std::set<int>& punct_labels) {
  const auto g = span_arcs(gold, labeled, punct_labels);
  const auto p = span_arcs(pred, labeled, punct_labels);
  MatchCounts c;
  c.gold_total = static_cast<long>(g.size());
  c.pred_total = static_cast<long>(p.size());
  size_t gi = 0, pi = 0;
  while (gi < g.size() && pi < p.size()) {
    if (g[gi] == p[pi]) {
      ++c.matched;
      ++gi;
      ++pi;
    } else if (g[gi] < p[pi]) {
      ++gi;
    } else {
      ++pi;
    }
  }
  return c;
}

double dep_f1(const WordTree& gold, const WordTree& pred, bool labeled,
              const std::set<int>& punct_labels) {
  return dep_match_counts(gold, pred, labeled, punct_labels).prf().f1;
}

AttachmentCounts attachment_counts(const WordTree& gold, const WordTree& pred,
                                   const std::set<int>& punct_labels) {
  if (!(gold.seg == pred.seg))
    throw std::invalid_argument("attachment scores require identical segmentation");
  AttachmentCounts c;
  for (int w = 1; w <= gold.num_words(); ++w) {
    if (punct_labels.count(gold.wlabel[w])) continue;
    ++c.total;
    if (gold.whead[w] == pred.whead[w]) {
      ++c.head_correct;
      if (gold.wlabel[w] == pred.wlabel[w]) ++c.both_correct;
    }
  }
  return c;
}

std::pair<double, double> attachment_scores(const WordTree& gold, const WordTree& pred,
                                            const std::set<int>& punct_labels) {
  const AttachmentCounts c = attachment_counts(gold, pred, punct_labels);
  return {c.uas(), c.las()};
}

void StructureHistogram::add(const IntraStructure& s) {
  if (s.length() < 2) return;
  ++counts[s.length()][s.shape()];
}

void StructureHistogram::add(const StructureHistogram& o) {
  for (const auto& [len, by_shape] : o.counts)
    for (const auto& [shape, c] : by_shape) counts[len][shape] += c;
}

long StructureHistogram::total(int length) const {
  auto it = counts.find(length);
  if (it == counts.end()) return 0;
  long t = 0;
  for (const auto& [shape, c] : it->second) t += c;
  return t;
}

std::map<int, std::map<std::string, double>> StructureHistogram::percentages() const {
  std::map<int, std::map<std::string, double>> out;
  for (const auto& [len, by_shape] : counts) {
    const long t = total(len);
    for (const auto& [shape, c] : by_shape)
      out[len][shape] = 100.0 * static_cast<double>(c) / static_cast<double>(t);
  }
  return out;
}

StructureHistogram structure_distribution(const std::vector<IntraStructure>& pred) {
  StructureHistogram hist;
  for (const auto& st : pred) hist.add(st);
  return hist;
}

CmResult structure_cm(const std::vector<StructureMap>& runs, const StructureMap& gold) {
  if (runs.empty()) throw std::invalid_argument("structure_cm needs at least one run");
  CmResult r;
  long one_to_one_hits = 0;
  long many_hits = 0;
  for (const auto& [occ, gold_struct] : gold) {
    bool all_present = true;
    for (const auto& run : runs)
      if (!run.count(occ)) all_present = false;
    if (!all_present) continue;
    ++r.evaluated;
    bool any = false;
    for (const auto& run : runs) {
      if (run.at(occ) == gold_struct) {
        ++one_to_one_hits;
        any = true;
      }
    }
    if (any) ++many_hits;
  }
  if (r.evaluated) {
    r.one_to_one = 100.0 * double(one_to_one_hits) / double(r.evaluated * runs.size());
    r.many_to_one = 100.0 * double(many_hits) / double(r.evaluated);
  }
  return r;
}

}  // namespace chardep
