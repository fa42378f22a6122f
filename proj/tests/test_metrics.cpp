#include <random>

#include "chardep/metrics.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chardep;

TEST_CASE("seg_f1") {
  SUBCASE("identical segmentations") {
    const Segmentation s = Segmentation::from_lengths({2, 2, 3});
    CHECK(seg_f1(s, s).f1 == doctest::Approx(1.0));
  }
  SUBCASE("partial overlap, hand counted") {
    // gold {上海, 计划}, pred {上, 海, 计划}: match only 计划.
    const Segmentation gold = Segmentation::from_lengths({2, 2});
    const Segmentation pred = Segmentation::from_lengths({1, 1, 2});
    const PRF prf = seg_f1(gold, pred);
    CHECK(prf.precision == doctest::Approx(1.0 / 3));
    CHECK(prf.recall == doctest::Approx(1.0 / 2));
    CHECK(prf.f1 == doctest::Approx(0.4));
  }
  SUBCASE("no overlap") {
    const Segmentation gold = Segmentation::from_lengths({2, 2});
    const Segmentation pred = Segmentation::from_lengths({1, 3});
    CHECK(seg_f1(gold, pred).f1 == doctest::Approx(0.0));
  }
  SUBCASE("length mismatch is an error") {
    CHECK_THROWS(seg_f1(Segmentation::from_lengths({2}),
                        Segmentation::from_lengths({3})));
  }
}

namespace {

WordTree make_tree(const std::vector<int>& lengths, const std::vector<Index>& whead,
                   const std::vector<int>& wlabel) {
  WordTree t(Segmentation::from_lengths(lengths));
  for (size_t w = 1; w < whead.size(); ++w) {
    t.whead[w] = whead[w];
    t.wlabel[w] = wlabel[w];
  }
  return t;
}

}  // namespace

TEST_CASE("dep_f1") {
  const auto ex = testutil::make_running_example();
  SUBCASE("self comparison is one") {
    CHECK(dep_f1(ex.word_tree, ex.word_tree, false, {}) == doctest::Approx(1.0));
    CHECK(dep_f1(ex.word_tree, ex.word_tree, true, {}) == doctest::Approx(1.0));
  }
  SUBCASE("one mis-segmented word fails the arcs touching it") {
    // gold: 4 words; pred splits word 4 (金融业 -> 金融 | 业).
    const WordTree gold = ex.word_tree;
    WordTree pred = make_tree({2, 2, 2, 2, 1}, {-1, 2, 0, 2, 3, 4},
                              {-1, ex.nsubj, ex.root, ex.ccomp, ex.dobj,
                               ex.dobj});
    // Arcs by span: gold has 4, pred has 5; matching arcs are those not
    // touching the broken word: nsubj, root, ccomp.
    const MatchCounts c = dep_match_counts(gold, pred, false, {});
    CHECK(c.matched == 3);
    CHECK(c.gold_total == 4);
    CHECK(c.pred_total == 5);
    CHECK(dep_f1(gold, pred, false, {}) == doctest::Approx(2.0 * 3 / 9));
  }
  SUBCASE("labeled is never above unlabeled") {
    std::mt19937_64 rng(3);
    for (int it = 0; it < 100; ++it) {
      const std::vector<int> lens{1, 2, 1};
      WordTree gold = make_tree(lens, {-1, 2, 0, 2}, {-1, 2, 1, 3});
      WordTree pred = make_tree(lens, {-1, 2, 0, 2}, {-1, 2, 1, 3});
      pred.whead[1] = rng() % 2 == 0 ? 2 : 3;
      pred.wlabel[3] = 2 + static_cast<int>(rng() % 2);
      CHECK(dep_f1(gold, pred, true, {}) <= dep_f1(gold, pred, false, {}) + 1e-12);
    }
  }
  SUBCASE("punctuation-labeled arcs are removed before counting") {
    WordTree gold = make_tree({1, 1, 1}, {-1, 2, 0, 2}, {-1, 2, 1, 9});
    WordTree pred = make_tree({1, 1, 1}, {-1, 2, 0, 1}, {-1, 2, 1, 9});
    CHECK(dep_f1(gold, pred, false, {}) == doctest::Approx(2.0 / 3));
    CHECK(dep_f1(gold, pred, false, {9}) == doctest::Approx(1.0));
  }
}

TEST_CASE("attachment_scores") {
  SUBCASE("identical trees") {
    const auto ex = testutil::make_running_example();
    const auto [uas, las] = attachment_scores(ex.word_tree, ex.word_tree, {});
    CHECK(uas == doctest::Approx(1.0));
    CHECK(las == doctest::Approx(1.0));
  }
  SUBCASE("one wrong head among five non-punct words") {
    const std::vector<int> lens{1, 1, 1, 1, 1};
    WordTree gold = make_tree(lens, {-1, 2, 0, 2, 3, 3}, {-1, 2, 1, 3, 4, 4});
    WordTree pred = gold;
    pred.whead[5] = 2;
    const auto [uas, las] = attachment_scores(gold, pred, {});
    CHECK(uas == doctest::Approx(0.8));
    CHECK(las == doctest::Approx(0.8));
  }
  SUBCASE("LAS never exceeds UAS") {
    std::mt19937_64 rng(7);
    const std::vector<int> lens{1, 2, 1};
    for (int it = 0; it < 50; ++it) {
      WordTree gold = make_tree(lens, {-1, 2, 0, 2}, {-1, 2, 1, 3});
      WordTree pred = gold;
      pred.whead[3] = rng() % 2 == 0 ? 2 : 1;
      pred.wlabel[3] = 2 + static_cast<int>(rng() % 2);
      const auto [uas, las] = attachment_scores(gold, pred, {});
      CHECK(las <= uas + 1e-12);
    }
  }
  SUBCASE("segmentation mismatch is an error") {
    WordTree gold = make_tree({1, 2}, {-1, 2, 0}, {-1, 2, 1});
    WordTree pred = make_tree({2, 1}, {-1, 2, 0}, {-1, 2, 1});
    CHECK_THROWS(attachment_scores(gold, pred, {}));
  }
}

TEST_CASE("structure_distribution") {
  SUBCASE("uniform corpus of left-headed two-character words") {
    StructureHistogram hist;
    IntraStructure left;
    left.head = {0, 1};
    for (int i = 0; i < 10; ++i) hist.add(left);
    const auto pct = hist.percentages();
    REQUIRE(pct.count(2) == 1);
    CHECK(pct.at(2).at("R 1") == doctest::Approx(100.0));
  }
  SUBCASE("mixed corpus matches direct counts and sums to 100") {
    StructureHistogram hist;
    IntraStructure a, b, c;
    a.head = {0, 1};
    b.head = {2, 0};
    c.head = {2, 0, 2};
    for (int i = 0; i < 3; ++i) hist.add(a);
    hist.add(b);
    for (int i = 0; i < 4; ++i) hist.add(c);
    const auto pct = hist.percentages();
    CHECK(pct.at(2).at("R 1") == doctest::Approx(75.0));
    CHECK(pct.at(2).at("2 R") == doctest::Approx(25.0));
    CHECK(pct.at(3).at("2 R 2") == doctest::Approx(100.0));
    for (const auto& [len, shapes] : pct) {
      double sum = 0.0;
      for (const auto& [shape, p] : shapes) sum += p;
      CHECK(sum == doctest::Approx(100.0));
    }
  }
  SUBCASE("collection entry point") {
    IntraStructure a, b;
    a.head = {0, 1};
    b.head = {2, 0};
    const StructureHistogram hist = structure_distribution({a, a, b});
    CHECK(hist.percentages().at(2).at("R 1") == doctest::Approx(100.0 * 2 / 3));
  }
  SUBCASE("single-character words are excluded") {
    StructureHistogram hist;
    IntraStructure one;
    one.head = {0};
    hist.add(one);
    CHECK(hist.counts.empty());
  }
}

TEST_CASE("structure_cm") {
  IntraStructure l, r;
  l.head = {0, 1};
  r.head = {2, 0};
  SUBCASE("single run, all matching") {
    StructureMap gold{{{0, 1}, l}, {{0, 2}, r}};
    const CmResult cm = structure_cm({gold}, gold);
    CHECK(cm.evaluated == 2);
    CHECK(cm.one_to_one == doctest::Approx(100.0));
    CHECK(cm.many_to_one == doctest::Approx(100.0));
  }
  SUBCASE("two runs matching disjoint halves") {
    StructureMap gold{{{0, 1}, l}, {{0, 2}, r}};
    StructureMap run1{{{0, 1}, l}, {{0, 2}, l}};
    StructureMap run2{{{0, 1}, r}, {{0, 2}, r}};
    const CmResult cm = structure_cm({run1, run2}, gold);
    CHECK(cm.one_to_one == doctest::Approx(50.0));
    CHECK(cm.many_to_one == doctest::Approx(100.0));
  }
  SUBCASE("many-to-one dominates one-to-one") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 50; ++it) {
      StructureMap gold, run1, run2;
      for (int i = 0; i < 6; ++i) {
        gold[{0, i}] = rng() % 2 ? l : r;
        run1[{0, i}] = rng() % 2 ? l : r;
        run2[{0, i}] = rng() % 2 ? l : r;
      }
      const CmResult cm = structure_cm({run1, run2}, gold);
      CHECK(cm.many_to_one >= cm.one_to_one - 1e-12);
      CHECK(cm.many_to_one <= 100.0 + 1e-12);
    }
  }
  SUBCASE("at least one run required") { CHECK_THROWS(structure_cm({}, {})); }
}
