#include <random>

#include "chardep/selfcheck.hpp"
#include "chardep/types.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chardep;

TEST_CASE("validate_char_tree basics") {
  CharTree one(1);
  one.head = {-1, 0};
  one.label = {-1, 1};
  CHECK(validate_char_tree(one));

  CharTree cycle(2);
  cycle.head = {-1, 2, 1};
  cycle.label = {-1, 1, 1};
  CHECK_FALSE(validate_char_tree(cycle));

  const auto ex = testutil::make_running_example();
  CHECK(validate_char_tree(ex.annotated));
  CHECK(validate_char_tree(ex.leftward));
}

TEST_CASE("validate_char_tree rejects crossing arcs and multi-roots") {
  CharTree crossing(4);  // arcs (3,1) and (4,2) cross
  crossing.head = {-1, 3, 4, 0, 3};
  crossing.label = {-1, 1, 1, 1, 1};
  CHECK(heads_single_rooted_tree(crossing.head));
  CHECK_FALSE(validate_char_tree(crossing));

  CharTree two_roots(2);
  two_roots.head = {-1, 0, 0};
  two_roots.label = {-1, 1, 1};
  CHECK_FALSE(validate_char_tree(two_roots));
}

TEST_CASE("arc_admissible on the running example") {
  const auto ex = testutil::make_running_example();
  CHECK(arc_admissible(ex.spec, 7, 8));   // both in 金融业
  CHECK(arc_admissible(ex.spec, 5, 9));   // 发展 heads 金融业 (dobj)
  CHECK_FALSE(arc_admissible(ex.spec, 1, 3));  // 上海 does not head 计划
  CHECK(arc_admissible(ex.spec, 0, 3));   // 计划 is the root word
  CHECK_FALSE(arc_admissible(ex.spec, 0, 1));
  CHECK_THROWS_AS(arc_admissible(ex.spec, 0, 10), std::out_of_range);
  CHECK_THROWS_AS(arc_admissible(ex.spec, -1, 1), std::out_of_range);
  CHECK_THROWS_AS(arc_admissible(ex.spec, 3, 3), std::out_of_range);
}

TEST_CASE("arc admissibility is direction-sensitive across words") {
  const auto ex = testutil::make_running_example();
  std::mt19937_64 rng(11);
  for (int it = 0; it < 200; ++it) {
    const int n = ex.spec.num_chars();
    const Index h = 1 + static_cast<Index>(rng() % n);
    const Index m = 1 + static_cast<Index>(rng() % n);
    if (h == m) continue;
    const bool same_word = ex.spec.word_of[h] == ex.spec.word_of[m];
    if (same_word) {
      CHECK(arc_admissible(ex.spec, h, m) == arc_admissible(ex.spec, m, h));
    } else {
      const bool both =
          arc_admissible(ex.spec, h, m) && arc_admissible(ex.spec, m, h);
      CHECK_FALSE(both);
    }
  }
}

TEST_CASE("BMES round trip") {
  std::mt19937_64 rng(3);
  for (int it = 0; it < 50; ++it) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Segmentation seg = testgen::random_segmentation(n, rng, 4);
    CHECK(segmentation_from_bmes(segmentation_to_bmes(seg)) == seg);
  }
  CHECK(segmentation_to_bmes(Segmentation::from_lengths({2, 1, 3})) == "BESBME");
  CHECK_THROWS(segmentation_from_bmes("BB"));
  CHECK_THROWS(segmentation_from_bmes("ME"));
  CHECK_THROWS(segmentation_from_bmes("B"));
}

TEST_CASE("segmentation validity") {
  CHECK(Segmentation::from_lengths({1, 2, 3}).valid());
  Segmentation gap;
  gap.spans = {{1, 2}, {4, 5}};
  CHECK_FALSE(gap.valid());
  Segmentation overlap;
  overlap.spans = {{1, 3}, {2, 4}};
  CHECK_FALSE(overlap.valid());
  CHECK_THROWS(Segmentation::from_lengths({0}));
}

TEST_CASE("label interning keeps INTRA at id 0") {
  LabelSet labels({"nsubj", "dobj"});
  CHECK(labels.id_of(LabelSet::kIntraName) == LabelSet::kIntra);
  CHECK(labels.root_id() == 1);
  CHECK(labels.id_of("nsubj") == 2);
  CHECK(labels.intern("nsubj") == 2);
  CHECK(labels.intern("advmod") == 4);

  const LabelSet rebuilt = LabelSet::from_names(labels.names(), "root");
  CHECK(rebuilt.names() == labels.names());
  CHECK(rebuilt.root_id() == labels.root_id());
  CHECK_THROWS(LabelSet::from_names({"nsubj"}, "nsubj"));
}

TEST_CASE("ForestSpec invariants") {
  const auto ex = testutil::make_running_example();
  CHECK(ex.spec.root_word == 2);
  CHECK(ex.spec.word_of[0] == 0);
  CHECK(ex.spec.word_of[9] == 4);
  CHECK_THROWS(ForestSpec(Segmentation::from_lengths({2, 2}), {-1, 1, 2}));  // no root
  Segmentation bad;
  bad.spans = {{2, 3}};
  CHECK_THROWS(ForestSpec::segmentation_only(bad));
}

TEST_CASE("masking an ArcScores table") {
  const auto ex = testutil::make_running_example();
  ArcScores scores(9, 1.0);
  const ArcScores masked = ex.spec.mask(scores);
  CHECK(masked(7, 8) == 1.0);
  CHECK(is_masked(masked(1, 3)));
  CHECK(is_masked(masked(3, 3)));
  CHECK(is_masked(masked(4, 0)));
  CHECK_THROWS(ex.spec.mask(ArcScores(5, 0.0)));
}
