#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "chardep/chart.hpp"
#include "chardep/convert.hpp"
#include "chardep/oracle.hpp"
#include "chardep/selfcheck.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace chardep;

TEST_CASE("eisner_decode smallest cases") {
  SUBCASE("n=1 has a single tree") {
    std::mt19937_64 rng(1);
    const ArcScores scores = testgen::random_scores(1, rng);
    CHECK(eisner_decode(scores) == std::vector<Index>{-1, 0});
  }
  SUBCASE("n=2 hand-verified argmax") {
    ArcScores s(2, 0.0);
    s(0, 1) = 5;
    s(1, 2) = 4;
    s(0, 2) = 1;
    s(2, 1) = 1;
    // Enumerate both projective two-character trees and compare sums.
    const auto trees = oracle::enumerate_projective(2);
    const auto best = oracle::brute_argmax(trees, s);
    const auto decoded = eisner_decode(s);
    CHECK(decoded == best.head);
    CHECK(decoded == std::vector<Index>{-1, 0, 1});
  }
  SUBCASE("all-masked scores leave no tree") {
    ArcScores s(2, kMaskedScore);
    CHECK_THROWS_AS(eisner_decode(s), NoValidTreeError);
  }
}

TEST_CASE("eisner_decode equals the enumeration argmax") {
  std::mt19937_64 rng(101);
  for (int it = 0; it < 40; ++it) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const auto trees = oracle::enumerate_projective(n);
    const ArcScores scores = testgen::random_scores(n, rng);
    const auto decoded = eisner_decode(scores);
    CHECK(validate_heads(decoded));
    CHECK(tree_score(decoded, scores) == oracle::brute_argmax(trees, scores).score);
  }
}

TEST_CASE("inside values") {
  std::mt19937_64 rng(7);
  SUBCASE("n=1 is the single root arc score") {
    const ArcScores s = testgen::random_scores(1, rng);
    CHECK(inside(s) == doctest::Approx(s(0, 1)).epsilon(1e-12));
  }
  SUBCASE("n=2 with zero scores counts both trees") {
    const ArcScores zero(2, 0.0);
    CHECK(inside(zero) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("random agreement with brute log-sum-exp") {
    for (int it = 0; it < 40; ++it) {
      const int n = 1 + static_cast<int>(rng() % 8);
      const auto trees = oracle::enumerate_projective(n);
      const ArcScores scores = testgen::random_scores(n, rng);
      CHECK(std::abs(inside(scores) - oracle::brute_logZ(trees, scores)) < 1e-6);
    }
  }
}

TEST_CASE("constrained_eisner recovers the annotated example under crafted scores") {
  const auto ex = testutil::make_running_example();
  ArcScores scores(9, 0.0);
  for (Index m = 1; m <= 9; ++m) scores(ex.annotated.head[m], m) = 5.0;
  const auto decoded = constrained_eisner(scores, ex.spec);
  CHECK(decoded == ex.annotated.head);
  // The vanilla decoder also recovers it: the crafted optimum is compatible.
  CHECK(eisner_decode(scores) == ex.annotated.head);
}

TEST_CASE("two characters forming one word are forced into a single-root shape") {
  const Segmentation seg = Segmentation::from_lengths({2});
  const ForestSpec spec(seg, {-1, 0});
  std::mt19937_64 rng(13);
  for (int it = 0; it < 10; ++it) {
    const auto heads = constrained_eisner(testgen::random_scores(2, rng), spec);
    int root_attached = 0;
    for (Index m = 1; m <= 2; ++m)
      if (heads[m] == 0) ++root_attached;
    CHECK(root_attached == 1);
    // The other character hangs off the root character: a single intra arc.
    const Index root_char = heads[1] == 0 ? 1 : 2;
    const Index other = root_char == 1 ? 2 : 1;
    CHECK(heads[other] == root_char);
  }
}

TEST_CASE("constrained chart agrees with the filtered oracle") {
  std::mt19937_64 rng(211);
  for (int it = 0; it < 30; ++it) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const auto trees = oracle::enumerate_projective(n);
    const ArcScores scores = testgen::random_scores(n, rng);
    const ForestSpec spec = testgen::random_forest_spec(n, rng);
    const auto compat = oracle::filter_compatible(trees, spec);
    const ArcScores masked = spec.mask(scores);

    const auto decoded = constrained_eisner(scores, spec);
    CHECK(oracle::compatible_with(decoded, spec));
    CHECK(tree_score(decoded, masked) == oracle::brute_argmax(compat, masked).score);
    CHECK(std::abs(constrained_inside(scores, spec) -
                   oracle::brute_logZ(compat, masked)) < 1e-6);
  }
}

TEST_CASE("constrained_inside special values") {
  SUBCASE("single-character words with fixed heads leave exactly one tree") {
    const Segmentation seg = Segmentation::from_lengths({1, 1, 1});
    const ForestSpec spec(seg, {-1, 2, 0, 2});
    const ArcScores zero(3, 0.0);
    CHECK(constrained_inside(zero, spec) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("running example forest size via log count") {
    const auto ex = testutil::make_running_example();
    const auto compat =
        oracle::filter_compatible(oracle::enumerate_projective(9), ex.spec);
    const ArcScores zero(9, 0.0);
    CHECK(constrained_inside(zero, ex.spec) ==
          doctest::Approx(std::log(double(compat.size()))).epsilon(1e-9));
  }
  SUBCASE("empty forest raises") {
    // Pin both single-word structures to conflicting shapes via narrowing.
    const Segmentation seg = Segmentation::from_lengths({2});
    ForestSpec spec(seg, {-1, 0});
    IntraStructure left, right;
    left.head = {2, 0};
    ForestSpec narrowed = narrow_forest(spec, {{1, left}});
    ArcScores scores(2, 0.0);
    scores(2, 1) = kMaskedScore;  // kill the one compatible tree
    CHECK_THROWS_AS(constrained_inside(scores, narrowed), NoValidTreeError);
  }
}

TEST_CASE("masking monotonicity: adding masks never increases log Z") {
  std::mt19937_64 rng(47);
  for (int it = 0; it < 20; ++it) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const ArcScores scores = testgen::random_scores(n, rng);
    const ForestSpec spec = testgen::random_forest_spec(n, rng);
    const ForestSpec seg_only = ForestSpec::segmentation_only(spec.seg);
    const double z_all = inside(scores);
    const double z_seg = constrained_inside(scores, seg_only);
    const double z_forest = constrained_inside(scores, spec);
    CHECK(z_seg <= z_all + 1e-9);
    CHECK(z_forest <= z_seg + 1e-9);
  }
}

TEST_CASE("semiring duality: backpointer tree score reproduces chart value") {
  std::mt19937_64 rng(53);
  for (int it = 0; it < 20; ++it) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const ArcScores scores = testgen::random_scores(n, rng);
    const auto heads = eisner_decode(scores);
    // Max-product chart value goes through the same additions as the
    // canonical score only on the decoded tree, so equality is exact.
    CHECK(tree_score(heads, scores) ==
          oracle::brute_argmax({heads}, scores).score);
    const double log_z = inside(scores);
    CHECK(tree_score(heads, scores) <= log_z + 1e-9);
  }
}

TEST_CASE("arc_marginals") {
  std::mt19937_64 rng(59);
  SUBCASE("n=1 root marginal is one") {
    const ArcScores s = testgen::random_scores(1, rng);
    const ArcScores m = arc_marginals(s);
    CHECK(m(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("inadmissible arcs get exactly zero") {
    const auto ex = testutil::make_running_example();
    const ArcScores s = testgen::random_scores(9, rng);
    const ArcScores m = arc_marginals(s, &ex.spec);
    CHECK(m(1, 3) == 0.0);
    CHECK(m(0, 1) == 0.0);
    CHECK(m(7, 8) > 0.0);
  }
  SUBCASE("finite differences of log Z") {
    for (int it = 0; it < 6; ++it) {
      const int n = 1 + static_cast<int>(rng() % 6);
      const ArcScores scores = testgen::random_scores(n, rng);
      const ForestSpec spec = testgen::random_forest_spec(n, rng);
      const ArcScores m_u = arc_marginals(scores);
      const ArcScores m_c = arc_marginals(scores, &spec);
      const double eps = 1e-4;
      for (Index h = 0; h <= n; ++h) {
        for (Index m = 1; m <= n; ++m) {
          if (h == m) continue;
          ArcScores up = scores, dn = scores;
          up(h, m) += eps;
          dn(h, m) -= eps;
          CHECK(std::abs((inside(up) - inside(dn)) / (2 * eps) - m_u(h, m)) < 1e-4);
          if (spec.admissible(h, m)) {
            const double fd =
                (constrained_inside(up, spec) - constrained_inside(dn, spec)) / (2 * eps);
            CHECK(std::abs(fd - m_c(h, m)) < 1e-4);
          }
        }
      }
    }
  }
  SUBCASE("marginals sum to n over arcs") {
    for (int it = 0; it < 10; ++it) {
      const int n = 1 + static_cast<int>(rng() % 7);
      const ArcScores scores = testgen::random_scores(n, rng);
      const ArcScores m = arc_marginals(scores);
      double total = 0.0;
      for (Index h = 0; h <= n; ++h)
        for (Index mm = 1; mm <= n; ++mm)
          if (h != mm) total += m(h, mm);
      CHECK(total == doctest::Approx(double(n)).epsilon(1e-9));
    }
  }
}

TEST_CASE("constraint ablation reproduces each violation kind") {
  std::mt19937_64 rng(61);
  bool found_single_root_violation = false;
  bool found_root_as_head_violation = false;
  for (int it = 0; it < 3000 && !(found_single_root_violation &&
                                  found_root_as_head_violation);
       ++it) {
    const int n = 2 + static_cast<int>(rng() % 6);
    const ArcScores scores = testgen::random_scores(n, rng);
    const ForestSpec spec = testgen::random_forest_spec(n, rng);
    if (!found_single_root_violation) {
      const auto heads = constrained_eisner(scores, spec, {.single_root = false});
      if (!oracle::single_root_ok(heads, spec)) found_single_root_violation = true;
    }
    if (!found_root_as_head_violation) {
      const auto heads = constrained_eisner(scores, spec, {.root_as_head = false});
      if (!oracle::root_as_head_ok(heads, spec)) found_root_as_head_violation = true;
    }
  }
  CHECK(found_single_root_violation);
  CHECK(found_root_as_head_violation);
}

TEST_CASE("constrained decodes never violate the structural checkers") {
  std::mt19937_64 rng(67);
  for (int it = 0; it < 500; ++it) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const ArcScores scores = testgen::random_scores(n, rng);
    const ForestSpec spec = testgen::random_forest_spec(n, rng);
    const auto heads = constrained_eisner(scores, spec);
    CHECK(oracle::single_root_ok(heads, spec));
    CHECK(oracle::root_as_head_ok(heads, spec));
  }
}

TEST_CASE("c2f decode") {
  SUBCASE("n=1 yields the single inter-tagged root arc") {
    C2fArcScores s(1, 0.0);
    const C2fTree t = c2f_eisner(s);
    CHECK(t.head == std::vector<Index>{-1, 0});
    CHECK(t.role[1] == ArcRole::kInter);
  }
  SUBCASE("dominant intra scores glue a two-character window together") {
    const int n = 4;
    C2fArcScores s(n, -1.0);
    for (Index h = 0; h <= n; ++h)
      for (Index m = 1; m <= n; ++m)
        if (h != m) s.inter(h, m) = 0.5;
    s.intra(1, 2) = 6.0;
    s.intra(2, 1) = 6.0;
    s.mask_intra_root();
    const C2fTree t = c2f_eisner(s);
    const bool glued = (t.head[2] == 1 && t.role[2] == ArcRole::kIntra) ||
                       (t.head[1] == 2 && t.role[1] == ArcRole::kIntra);
    CHECK(glued);
    const auto brute =
        oracle::brute_c2f(oracle::enumerate_projective(n), s, true);
    double got = 0.0;
    for (Index m = 1; m <= n; ++m)
      got += (t.role[m] == ArcRole::kIntra ? s.intra : s.inter)(t.head[m], m);
    CHECK(got == doctest::Approx(brute.score).epsilon(1e-12));
  }
  SUBCASE("agreement with exhaustive (tree, tagging) search") {
    std::mt19937_64 rng(71);
    for (int it = 0; it < 25; ++it) {
      const int n = 1 + static_cast<int>(rng() % 6);
      const auto trees = oracle::enumerate_projective(n);
      const C2fArcScores s = testgen::random_c2f_scores(n, rng);
      for (const bool exclude : {true, false}) {
        const C2fTree t = c2f_eisner(s, exclude);
        CHECK(oracle::c2f_legal(t.head, t.role, exclude));
        const auto brute = oracle::brute_c2f(trees, s, exclude);
        double got = 0.0;
        for (Index m = 1; m <= n; ++m)
          got += (t.role[m] == ArcRole::kIntra ? s.intra : s.inter)(t.head[m], m);
        CHECK(got == doctest::Approx(brute.score).epsilon(1e-12));
        CHECK(std::abs(c2f_inside(s, exclude) - brute.log_z) < 1e-6);
      }
    }
  }
  SUBCASE("fully masked tables leave no derivation") {
    C2fArcScores dead(2, kMaskedScore);
    CHECK_THROWS_AS(c2f_eisner(dead), NoValidTreeError);
    CHECK_THROWS_AS(c2f_inside(dead), NoValidTreeError);
    // Intra masked everywhere and no ROOT arc: n>1 cannot be derived.
    C2fArcScores no_path(3, kMaskedScore);
    no_path.inter(1, 2) = 0.0;  // a stray admissible arc is not enough
    CHECK_THROWS_AS(c2f_eisner(no_path), NoValidTreeError);
  }
  SUBCASE("no inter arc below an intra arc, many seeds") {
    std::mt19937_64 rng(73);
    for (int it = 0; it < 300; ++it) {
      const int n = 1 + static_cast<int>(rng() % 8);
      const C2fArcScores s = testgen::random_c2f_scores(n, rng);
      const C2fTree t = c2f_eisner(s);
      for (Index m = 1; m <= n; ++m)
        if (t.head[m] == 0) CHECK(t.role[m] == ArcRole::kInter);
      CHECK(oracle::c2f_legal(t.head, t.role, true));
    }
  }
}

TEST_CASE("disabling the root-as-head exclusion strictly enlarges the derivation set") {
  // Witness on an n=5 instance, counted by the sum-product chart at zero
  // scores and confirmed by the exhaustive tagging search.
  const int n = 5;
  const C2fArcScores zero(n, 0.0);
  const auto trees = oracle::enumerate_projective(n);
  const long with_rule = oracle::brute_c2f(trees, zero, true).derivations;
  const long without_rule = oracle::brute_c2f(trees, zero, false).derivations;
  CHECK(without_rule > with_rule);
  CHECK(std::llround(std::exp(c2f_inside(zero, true))) == with_rule);
  CHECK(std::llround(std::exp(c2f_inside(zero, false))) == without_rule);
}

TEST_CASE("c2f marginals match finite differences") {
  std::mt19937_64 rng(79);
  for (int it = 0; it < 5; ++it) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const C2fArcScores s = testgen::random_c2f_scores(n, rng);
    const C2fMarginals m = c2f_arc_marginals(s);
    const double eps = 1e-5;
    for (Index h = 0; h <= n; ++h) {
      for (Index mm = 1; mm <= n; ++mm) {
        if (h == mm) continue;
        {
          C2fArcScores up = s, dn = s;
          up.inter(h, mm) += eps;
          dn.inter(h, mm) -= eps;
          const double fd = (c2f_inside(up) - c2f_inside(dn)) / (2 * eps);
          CHECK(std::abs(fd - m.inter(h, mm)) < 1e-5);
        }
        if (h != 0) {
          C2fArcScores up = s, dn = s;
          up.intra(h, mm) += eps;
          dn.intra(h, mm) -= eps;
          const double fd = (c2f_inside(up) - c2f_inside(dn)) / (2 * eps);
          CHECK(std::abs(fd - m.intra(h, mm)) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("merge_c2f_scores routes by role") {
  const auto ex = testutil::make_running_example();
  std::mt19937_64 rng(83);
  const C2fArcScores s = testgen::random_c2f_scores(9, rng);
  const ArcScores merged = merge_c2f_scores(s, ex.spec);
  CHECK(merged(7, 8) == s.intra(7, 8));
  CHECK(merged(5, 9) == s.inter(5, 9));
  CHECK(merged(0, 4) == s.inter(0, 4));
  CHECK(is_masked(merged(1, 3)));

  // Constrained inside over the merged table equals brute force over the
  // compatible set with per-role arc scoring.
  const auto compat =
      oracle::filter_compatible(oracle::enumerate_projective(9), ex.spec);
  double brute = kMaskedScore;
  for (const auto& head : compat) {
    double v = 0.0;
    for (Index m = 1; m <= 9; ++m) {
      const bool intra =
          head[m] != 0 && ex.spec.word_of[head[m]] == ex.spec.word_of[m];
      v += (intra ? s.intra : s.inter)(head[m], m);
    }
    if (is_masked(brute)) {
      brute = v;
    } else {
      const double hi = std::max(brute, v), lo = std::min(brute, v);
      brute = hi + std::log1p(std::exp(lo - hi));
    }
  }
  CHECK(std::abs(constrained_inside(merged, ex.spec) - brute) < 1e-6);
}

TEST_CASE("charts are reentrant over shared read-only scores") {
  std::mt19937_64 rng(97);
  const int n = 8;
  const ArcScores scores = testgen::random_scores(n, rng);
  const ForestSpec spec = testgen::random_forest_spec(n, rng);
  const auto expect_heads = constrained_eisner(scores, spec);
  const double expect_lz = constrained_inside(scores, spec);
  std::vector<std::thread> pool;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&] {
      for (int it = 0; it < 50; ++it) {
        if (constrained_eisner(scores, spec) != expect_heads) ++mismatches;
        if (std::abs(constrained_inside(scores, spec) - expect_lz) > 1e-12)
          ++mismatches;
      }
    });
  }
  for (auto& t : pool) t.join();
  CHECK(mismatches == 0);
}

TEST_CASE("every decoder output validates as a char tree") {
  std::mt19937_64 rng(89);
  for (int it = 0; it < 60; ++it) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const ArcScores scores = testgen::random_scores(n, rng);
    CHECK(validate_heads(eisner_decode(scores)));
    const ForestSpec spec = testgen::random_forest_spec(n, rng);
    CHECK(validate_heads(constrained_eisner(scores, spec)));
    const C2fArcScores cs = testgen::random_c2f_scores(n, rng);
    CHECK(validate_heads(c2f_eisner(cs).head));
  }
}
