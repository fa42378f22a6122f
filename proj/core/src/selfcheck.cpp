#include "chardep/selfcheck.hpp"

#include <cmath>
#include <sstream>

#include "chardep/chart.hpp"

namespace chardep {

namespace testgen {

Segmentation random_segmentation(int n, std::mt19937_64& rng, int max_word_len) {
  std::vector<int> lengths;
  int left = n;
  while (left > 0) {
    std::uniform_int_distribution<int> d(1, std::min(max_word_len, left));
    const int len = d(rng);
    lengths.push_back(len);
    left -= len;
  }
  return Segmentation::from_lengths(lengths);
}

std::vector<Index> random_projective_heads(int n, std::mt19937_64& rng) {
  // Decoding random scores yields a projective tree for any n.
  return eisner_decode(random_scores(n, rng));
}

ForestSpec random_forest_spec(int n, std::mt19937_64& rng) {
  Segmentation seg = random_segmentation(n, rng);
  std::vector<Index> whead = random_projective_heads(seg.num_words(), rng);
  return ForestSpec(std::move(seg), std::move(whead));
}

ArcScores random_scores(int n, std::mt19937_64& rng, double lo, double hi) {
  ArcScores s(n, 0.0);
  std::uniform_real_distribution<double> d(lo, hi);
  for (Index h = 0; h <= n; ++h)
    for (Index m = 1; m <= n; ++m)
      if (h != m) s(h, m) = d(rng);
  return s;
}

C2fArcScores random_c2f_scores(int n, std::mt19937_64& rng, double lo, double hi) {
  C2fArcScores s(n, 0.0);
  std::uniform_real_distribution<double> d(lo, hi);
  for (Index h = 0; h <= n; ++h) {
    for (Index m = 1; m <= n; ++m) {
      if (h == m) continue;
      s.intra(h, m) = d(rng);
      s.inter(h, m) = d(rng);
    }
  }
  s.mask_intra_root();
  return s;
}

}  // namespace testgen

namespace {

struct Failure {
  bool failed = false;
  std::string dump;
};

std::string dump_instance(const char* what, int n, int seed_idx, double got,
                          double want, const ForestSpec* spec) {
  std::ostringstream os;
  os << "counterexample: " << what << " disagrees at n=" << n << " instance "
     << seed_idx << ": chart=" << got << " oracle=" << want;
  if (spec) {
    os << "\n  segmentation:";
    for (const Span& s : spec->seg.spans) os << " [" << s.begin << "," << s.end << "]";
    if (spec->has_whead()) {
      os << "\n  whead:";
      for (int w = 1; w <= spec->num_words(); ++w) os << ' ' << spec->whead[w];
    }
  }
  return os.str();
}

}  // namespace

SelfCheckReport run_selfcheck(const SelfCheckOptions& opts) {
  SelfCheckReport report;
  Failure fail;
  auto record = [&](const char* name, int n, long pass, long total) {
    std::ostringstream os;
    os << name << " n=" << n << ": " << pass << "/" << total
       << (pass == total ? " PASS" : " FAIL");
    report.lines.push_back(os.str());
    if (pass != total) report.ok = false;
  };

  for (int n = 1; n <= opts.max_n; ++n) {
    const auto trees = oracle::enumerate_projective(n);
    long inside_ok = 0, cinside_ok = 0, count_ok = 0, decode_ok = 0, cdecode_ok = 0;
    long marg_ok = 0, fd_ok = 0;
    const long fd_total = std::min(opts.fd_instances_per_n, opts.seeds_per_n);
    for (int it = 0; it < opts.seeds_per_n; ++it) {
      std::mt19937_64 rng(opts.base_seed + static_cast<std::uint64_t>(n) * 1000003 + it);
      ArcScores scores = testgen::random_scores(n, rng);
      const ForestSpec spec = testgen::random_forest_spec(n, rng);
      ArcScores chart_scores = scores;
      if (opts.inject_inside_fault) chart_scores(0, 1) = -chart_scores(0, 1);

      // (a) inside vs brute log-sum-exp
      const double lz = inside(chart_scores);
      const double blz = oracle::brute_logZ(trees, scores);
      if (std::abs(lz - blz) <= 1e-6) {
        ++inside_ok;
      } else if (!fail.failed) {
        fail = {true, dump_instance("inside vs brute_logZ", n, it, lz, blz, nullptr)};
      }

      // (b) constrained inside vs brute over the filtered set, plus the
      // zero-score count agreement.
      const auto compat = oracle::filter_compatible(trees, spec);
      const ArcScores masked = spec.mask(scores);
      const double clz = constrained_inside(scores, spec);
      const double bclz = oracle::brute_logZ(compat, masked);
      if (std::abs(clz - bclz) <= 1e-6) {
        ++cinside_ok;
      } else if (!fail.failed) {
        fail = {true, dump_instance("constrained_inside vs filtered brute_logZ", n, it,
                                    clz, bclz, &spec)};
      }
      const ArcScores zero(n, 0.0);
      const double count_lz = constrained_inside(zero, spec);
      if (std::llround(std::exp(count_lz)) == static_cast<long long>(compat.size())) {
        ++count_ok;
      } else if (!fail.failed) {
        fail = {true, dump_instance("compatible-tree count", n, it, std::exp(count_lz),
                                    double(compat.size()), &spec)};
      }

      // (c) decoder scores match brute argmax exactly
      const auto decoded = eisner_decode(scores);
      const auto brute = oracle::brute_argmax(trees, scores);
      if (tree_score(decoded, scores) == brute.score) {
        ++decode_ok;
      } else if (!fail.failed) {
        fail = {true, dump_instance("eisner_decode score", n, it,
                                    tree_score(decoded, scores), brute.score, nullptr)};
      }
      const auto cdecoded = constrained_eisner(scores, spec);
      const auto cbrute = oracle::brute_argmax(compat, masked);
      if (tree_score(cdecoded, masked) == cbrute.score &&
          oracle::compatible_with(cdecoded, spec)) {
        ++cdecode_ok;
      } else if (!fail.failed) {
        fail = {true, dump_instance("constrained_eisner score", n, it,
                                    tree_score(cdecoded, masked), cbrute.score, &spec)};
      }

      // (d) marginals vs enumeration frequencies
      bool marg_fine = true;
      const ArcScores marg_u = arc_marginals(scores);
      const ArcScores bmarg_u = oracle::brute_marginals(trees, scores);
      const ArcScores marg_c = arc_marginals(scores, &spec);
      const ArcScores bmarg_c = oracle::brute_marginals(compat, masked);
      for (Index h = 0; h <= n && marg_fine; ++h) {
        for (Index m = 1; m <= n; ++m) {
          if (h == m) continue;
          if (std::abs(marg_u(h, m) - bmarg_u(h, m)) > 1e-6 ||
              std::abs(marg_c(h, m) - bmarg_c(h, m)) > 1e-6) {
            marg_fine = false;
            if (!fail.failed)
              fail = {true, dump_instance("arc_marginals vs enumeration", n, it,
                                          marg_u(h, m), bmarg_u(h, m), &spec)};
            break;
          }
        }
      }
      if (marg_fine) ++marg_ok;

      // marginals vs central finite differences of log Z
      if (it < fd_total) {
        bool fd_fine = true;
        const double eps = 1e-4;
        for (Index h = 0; h <= n && fd_fine; ++h) {
          for (Index m = 1; m <= n; ++m) {
            if (h == m) continue;
            ArcScores up = scores, dn = scores;
            up(h, m) += eps;
            dn(h, m) -= eps;
            const double fd_u = (inside(up) - inside(dn)) / (2 * eps);
            if (std::abs(fd_u - marg_u(h, m)) > 1e-4) {
              fd_fine = false;
              if (!fail.failed)
                fail = {true, dump_instance("marginal vs finite difference", n, it,
                                            marg_u(h, m), fd_u, nullptr)};
              break;
            }
            if (spec.admissible(h, m)) {
              const double fd_c =
                  (constrained_inside(up, spec) - constrained_inside(dn, spec)) / (2 * eps);
              if (std::abs(fd_c - marg_c(h, m)) > 1e-4) {
                fd_fine = false;
                if (!fail.failed)
                  fail = {true, dump_instance("constrained marginal vs finite difference",
                                              n, it, marg_c(h, m), fd_c, &spec)};
                break;
              }
            }
          }
        }
        if (fd_fine) ++fd_ok;
      }
    }
    record("inside vs brute", n, inside_ok, opts.seeds_per_n);
    record("constrained inside vs filtered brute", n, cinside_ok, opts.seeds_per_n);
    record("compatible count", n, count_ok, opts.seeds_per_n);
    record("decode score", n, decode_ok, opts.seeds_per_n);
    record("constrained decode score", n, cdecode_ok, opts.seeds_per_n);
    record("marginals vs enumeration", n, marg_ok, opts.seeds_per_n);
    record("marginals vs finite differences", n, fd_ok, fd_total);
  }
  report.counterexample = fail.dump;
  return report;
}

}  // namespace chardep
