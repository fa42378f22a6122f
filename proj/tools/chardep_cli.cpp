// Command-line front end: train / parse / evaluate / analyze / selfcheck.
// Exit codes: 0 success, 1 usage, 2 data error, 3 check failure.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "chardep/chart.hpp"
#include "chardep/convert.hpp"
#include "chardep/io.hpp"
#include "chardep/metrics.hpp"
#include "chardep/scorer.hpp"
#include "chardep/selfcheck.hpp"
#include "chardep/training.hpp"

namespace {

using namespace chardep;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheck = 3;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::set<int> punct_ids(const LabelSet& labels, const std::vector<std::string>& names) {
  std::set<int> ids;
  for (const auto& name : names) {
    const int id = labels.id_of(name);
    if (id >= 0) ids.insert(id);
  }
  return ids;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

// The most frequent label on root words; ties go to the smallest id.
int infer_root_label(const std::vector<ConllSentence>& corpus, const LabelSet& labels) {
  std::vector<long> freq(labels.size(), 0);
  for (const auto& s : corpus)
    for (int w = 1; w <= s.tree.num_words(); ++w)
      if (s.tree.whead[w] == 0) ++freq[s.tree.wlabel[w]];
  int best = -1;
  for (int l = 0; l < labels.size(); ++l)
    if (freq[l] > 0 && (best < 0 || freq[l] > freq[best])) best = l;
  return best;
}

std::vector<TrainExample> to_examples(const std::vector<ConllSentence>& corpus) {
  std::vector<TrainExample> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back({s.sent, s.tree});
  return out;
}

struct ParsedSentence {
  CharTree ctree;
  WordTree wtree;
};

ParsedSentence parse_one(const ReferenceScorer& scorer, const CharSentence& sent,
                         const Segmentation* gold_seg) {
  const int n = sent.size();
  ParsedSentence out;
  if (gold_seg) {
    const ForestSpec spec = ForestSpec::segmentation_only(*gold_seg);
    LabelScores labels;
    std::vector<Index> heads;
    if (scorer.is_c2f()) {
      C2fArcScores c2f(n);
      labels = LabelScores(n, scorer.num_labels());
      scorer.score_c2f(sent, c2f, labels);
      heads = constrained_eisner(merge_c2f_scores(c2f, spec), spec);
    } else {
      ArcScores arc(n);
      labels = LabelScores(n, scorer.num_labels());
      scorer.score(sent, arc, labels);
      heads = constrained_eisner(arc, spec);
    }
    std::vector<ArcRole> roles(n + 1, ArcRole::kInter);
    for (Index m = 1; m <= n; ++m)
      if (heads[m] != 0 && spec.word_of[heads[m]] == spec.word_of[m])
        roles[m] = ArcRole::kIntra;
    out.ctree = label_decode_roled(labels, heads, roles);
    out.wtree = recover_word_tree(out.ctree);
    return out;
  }
  if (scorer.is_c2f()) {
    C2fArcScores c2f(n);
    LabelScores labels(n, scorer.num_labels());
    scorer.score_c2f(sent, c2f, labels);
    const C2fTree t = c2f_eisner(c2f);
    out.ctree = label_decode_roled(labels, t.head, t.role);
    out.wtree = recover_word_tree(out.ctree);
    return out;
  }
  ArcScores arc(n);
  LabelScores labels(n, scorer.num_labels());
  scorer.score(sent, arc, labels);
  const auto heads = eisner_decode(arc);
  out.ctree = label_decode(labels, heads);
  int fallback = 1;
  for (int l = 1; l < scorer.labels().size(); ++l)
    if (l != scorer.labels().root_id()) { fallback = l; break; }
  out.wtree = recover_with_fallback(out.ctree, &labels, fallback);
  return out;
}

void parallel_for(int jobs, int count, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, count);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct DevScores {
  double uf = 0.0, lf = 0.0;
};

DevScores evaluate_dev(const ReferenceScorer& scorer,
                       const std::vector<ConllSentence>& dev,
                       const std::set<int>& punct) {
  MatchCounts uf, lf;
  for (const auto& s : dev) {
    const ParsedSentence p = parse_one(scorer, s.sent, nullptr);
    uf.add(dep_match_counts(s.tree, p.wtree, false, punct));
    lf.add(dep_match_counts(s.tree, p.wtree, true, punct));
  }
  return {uf.prf().f1, lf.prf().f1};
}

int cmd_train(const std::string& config_path, const std::string& train_path,
              const std::string& dev_path, const std::string& mode_flag,
              std::int64_t seed_flag, const std::string& out_prefix) {
  TrainConfig cfg;
  if (!config_path.empty()) cfg = load_train_config(config_path);
  if (!mode_flag.empty()) {
    const auto mode = parse_train_mode(mode_flag);
    if (!mode) throw DataError("invalid mode '" + mode_flag + "'");
    cfg.mode = *mode;
  }
  if (seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(seed_flag);

  LabelSet labels;
  const auto train_corpus = read_conll(train_path, labels);
  if (train_corpus.empty()) throw DataError(train_path + ": no sentences");
  std::vector<ConllSentence> dev_corpus;
  if (!dev_path.empty()) dev_corpus = read_conll(dev_path, labels);
  const int root_label = infer_root_label(train_corpus, labels);
  if (root_label < 0) throw DataError("no root attachment found in training data");
  labels.set_root(labels.name_of(root_label));

  const auto examples = to_examples(train_corpus);
  ReferenceScorer scorer(ReferenceScorer::collect_vocab(examples), labels,
                         {cfg.embedding_dim, cfg.hidden_dim},
                         cfg.mode == TrainMode::kLatentC2f, cfg.seed);

  const std::set<int> punct = punct_ids(labels, {"punct", "P"});
  std::vector<DevScores> dev_trace;
  auto hook = [&](int epoch, double loss) {
    std::ostringstream line;
    line << "epoch " << epoch << " loss " << std::fixed << std::setprecision(6) << loss;
    if (!dev_corpus.empty()) {
      const DevScores d = evaluate_dev(scorer, dev_corpus, punct);
      dev_trace.push_back(d);
      line << " dev_uf " << std::setprecision(4) << d.uf << " dev_lf " << d.lf;
    }
    std::cout << line.str() << '\n';
  };

  const TrainResult result = train(examples, scorer, cfg, hook);
  if (result.skipped_nonprojective > 0)
    std::cerr << "skipped " << result.skipped_nonprojective
              << " non-projective sentences\n";

  save_model(out_prefix + ".model", scorer, cfg.mode);
  std::ofstream trace(out_prefix + ".loss");
  if (!trace) throw DataError("cannot write " + out_prefix + ".loss");
  for (size_t e = 0; e < result.loss_trace.size(); ++e) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", result.loss_trace[e]);
    trace << e << '\t' << buf;
    if (e < dev_trace.size()) {
      std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", dev_trace[e].uf, dev_trace[e].lf);
      trace << '\t' << buf;
    }
    trace << '\n';
  }
  return 0;
}

int cmd_parse(const std::string& model_path, const std::string& input_path,
              const std::string& output_path, std::string word_output_path,
              bool gold_seg, int jobs) {
  const LoadedModel model = load_model(model_path);
  LabelSet input_labels;
  const auto input = read_conll(input_path, input_labels);
  if (word_output_path.empty()) word_output_path = output_path + ".words";

  std::vector<ParsedSentence> parsed(input.size());
  std::exception_ptr first_error;
  std::mutex error_mu;
  parallel_for(jobs, static_cast<int>(input.size()), [&](int i) {
    try {
      const Segmentation* seg = gold_seg ? &input[i].tree.seg : nullptr;
      parsed[i] = parse_one(*model.scorer, input[i].sent, seg);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!first_error) first_error = std::current_exception();
    }
  });
  if (first_error) std::rethrow_exception(first_error);

  const LabelSet& labels = model.scorer->labels();
  std::vector<CharTreeSentence> ctrees;
  std::vector<ConllSentence> wtrees;
  for (size_t i = 0; i < input.size(); ++i) {
    ctrees.push_back({input[i].sent, parsed[i].ctree});
    ConllSentence w;
    w.sent = input[i].sent;
    w.tree = parsed[i].wtree;
    w.forms = forms_from_segmentation(input[i].sent, parsed[i].wtree.seg);
    wtrees.push_back(std::move(w));
  }
  write_char_trees(output_path, ctrees, labels);
  write_conll(word_output_path, wtrees, labels);
  return 0;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path,
                 const std::string& punct_flag) {
  LabelSet labels;
  const auto gold = read_conll(gold_path, labels);
  const auto pred = read_conll(pred_path, labels);
  if (gold.size() != pred.size())
    throw DataError("sentence count mismatch: gold " + std::to_string(gold.size()) +
                    " vs pred " + std::to_string(pred.size()));
  const std::set<int> punct = punct_ids(labels, split_commas(punct_flag));

  MatchCounts seg, uf, lf;
  AttachmentCounts attach;
  bool segs_match = true;
  long cm_hits = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    seg.add(seg_match_counts(gold[i].tree.seg, pred[i].tree.seg));
    uf.add(dep_match_counts(gold[i].tree, pred[i].tree, false, punct));
    lf.add(dep_match_counts(gold[i].tree, pred[i].tree, true, punct));
    if (gold[i].tree.seg == pred[i].tree.seg)
      attach.add(attachment_counts(gold[i].tree, pred[i].tree, punct));
    else
      segs_match = false;
    if (gold[i].tree == pred[i].tree) ++cm_hits;
  }
  std::cout << std::fixed << std::setprecision(6);
  std::cout << "sentences: " << gold.size() << '\n';
  std::cout << "f1_seg: " << seg.prf().f1 << '\n';
  std::cout << "uf_dep: " << uf.prf().f1 << '\n';
  std::cout << "lf_dep: " << lf.prf().f1 << '\n';
  if (segs_match) {
    std::cout << "uas: " << attach.uas() << '\n';
    std::cout << "las: " << attach.las() << '\n';
  }
  std::cout << std::setprecision(2)
            << "cm: " << (gold.empty() ? 0.0 : 100.0 * cm_hits / gold.size()) << '\n';
  return 0;
}

void print_histogram(const StructureHistogram& hist, const std::string& title) {
  std::cout << title << '\n';
  for (const auto& [len, by_shape] : hist.percentages()) {
    // Highest percentage first, shape string as tie-break.
    std::vector<std::pair<std::string, double>> rows(by_shape.begin(), by_shape.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return a.second > b.second || (a.second == b.second && a.first < b.first);
    });
    for (const auto& [shape, pct] : rows) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", pct);
      std::cout << "length " << len << " | " << shape << " | " << buf << " | "
                << hist.counts.at(len).at(shape) << '\n';
    }
  }
}

int cmd_analyze(const std::vector<std::string>& model_paths,
                const std::vector<std::string>& pred_paths,
                const std::string& gold_seg_path, const std::string& annotations_path) {
  if (model_paths.empty() == pred_paths.empty())
    throw DataError("provide either --model runs or --pred runs");
  LabelSet labels;
  const auto gold_corpus = read_conll(gold_seg_path, labels);

  // One structure map per run, keyed by (sentence, word) occurrence.
  std::vector<StructureMap> runs;
  if (!model_paths.empty()) {
    for (const auto& path : model_paths) {
      const LoadedModel model = load_model(path);
      StructureMap run;
      for (size_t i = 0; i < gold_corpus.size(); ++i) {
        const auto& s = gold_corpus[i];
        const ParsedSentence p = parse_one(*model.scorer, s.sent, &s.tree.seg);
        const auto structs = extract_intra_structures(p.ctree.head, s.tree.seg);
        for (int w = 1; w <= s.tree.num_words(); ++w)
          run[{static_cast<int>(i), w}] = structs[w - 1];
      }
      runs.push_back(std::move(run));
    }
  } else {
    for (const auto& path : pred_paths) {
      LabelSet pred_labels;
      const auto trees = read_char_trees(path, pred_labels);
      if (trees.size() != gold_corpus.size())
        throw DataError(path + ": sentence count differs from --gold-seg corpus");
      StructureMap run;
      for (size_t i = 0; i < trees.size(); ++i) {
        const auto& seg = gold_corpus[i].tree.seg;
        const WordTree recovered = recover_word_tree(trees[i].tree);
        if (!(recovered.seg == seg))
          throw DataError(path + ": predicted segmentation differs from gold; "
                          "analyze expects gold-segmentation decodes");
        const auto structs = extract_intra_structures(trees[i].tree.head, seg);
        for (int w = 1; w <= seg.num_words(); ++w)
          run[{static_cast<int>(i), w}] = structs[w - 1];
      }
      runs.push_back(std::move(run));
    }
  }

  StructureHistogram hist;
  for (const auto& [occ, st] : runs.front()) hist.add(st);
  print_histogram(hist, "structure distribution (first run, all words)");

  if (!annotations_path.empty()) {
    const auto annotations = read_intra_annotations(annotations_path);
    StructureMap gold_structs;
    StructureHistogram annotated_hist;
    for (size_t i = 0; i < gold_corpus.size(); ++i) {
      const auto& s = gold_corpus[i];
      for (int w = 1; w <= s.tree.num_words(); ++w) {
        const Span sp = s.tree.seg.spans[w - 1];
        std::u32string form(s.sent.chars.begin() + sp.begin,
                            s.sent.chars.begin() + sp.end + 1);
        auto it = annotations.find(form);
        if (it == annotations.end()) continue;
        gold_structs[{static_cast<int>(i), w}] = it->second;
        auto pred_it = runs.front().find({static_cast<int>(i), w});
        if (pred_it != runs.front().end()) annotated_hist.add(pred_it->second);
      }
    }
    print_histogram(annotated_hist, "structure distribution (first run, annotated words)");
    const CmResult cm = structure_cm(runs, gold_structs);
    std::cout << std::fixed << std::setprecision(2);
    std::cout << "cm_evaluated: " << cm.evaluated << '\n';
    std::cout << "cm: " << cm.one_to_one << '\n';
    std::cout << "cm_m1: " << cm.many_to_one << '\n';
  }
  return 0;
}

int cmd_selfcheck(int max_n, int seeds, bool inject_fault) {
  SelfCheckOptions opts;
  opts.max_n = max_n;
  opts.seeds_per_n = seeds;
  opts.inject_inside_fault = inject_fault;
  const SelfCheckReport report = run_selfcheck(opts);
  for (const auto& line : report.lines) std::cout << line << '\n';
  if (!report.ok) {
    std::cerr << report.counterexample << '\n';
    return kExitCheck;
  }
  std::cout << "selfcheck: all checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"character-level dependency parsing with latent intra-word structure"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "train the reference scorer");
  std::string cfg_path, train_path, dev_path, mode_flag, out_prefix;
  std::int64_t seed_flag = -1;
  train->add_option("--config", cfg_path, "key-value training configuration");
  train->add_option("--train", train_path, "training corpus (CoNLL)")->required();
  train->add_option("--dev", dev_path, "development corpus (CoNLL)");
  train->add_option("--mode", mode_flag,
                    "latent | latent-c2f | leftward | rightward | pipeline-parse");
  train->add_option("--seed", seed_flag, "random seed (overrides config)");
  train->add_option("--out", out_prefix, "output prefix for .model/.loss")->required();

  auto* parse = app.add_subcommand("parse", "parse sentences with a trained model");
  std::string model_path, input_path, output_path, word_output_path;
  bool gold_seg = false;
  int jobs = 1;
  parse->add_option("--model", model_path, "model file")->required();
  parse->add_option("--input", input_path, "input corpus (CoNLL)")->required();
  parse->add_option("--output", output_path, "char-tree output file")->required();
  parse->add_option("--word-output", word_output_path,
                    "word-tree CoNLL output (default: <output>.words)");
  parse->add_flag("--gold-seg", gold_seg,
                  "decode constrained to the input segmentation");
  parse->add_option("--jobs", jobs, "parallel sentence workers")
      ->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
  std::string gold_path, pred_path, punct_flag = "punct,P";
  evaluate->add_option("--gold", gold_path, "gold corpus (CoNLL)")->required();
  evaluate->add_option("--pred", pred_path, "predicted corpus (CoNLL)")->required();
  evaluate->add_option("--punct-labels", punct_flag,
                       "comma-separated labels excluded as punctuation");

  auto* analyze = app.add_subcommand("analyze", "intra-word structure analysis");
  std::vector<std::string> an_models, an_preds;
  std::string an_gold_seg, an_annotations;
  analyze->add_option("--model", an_models, "model file (repeat for seed runs)");
  analyze->add_option("--pred", an_preds, "char-tree predictions (repeat for runs)");
  analyze->add_option("--gold-seg", an_gold_seg, "corpus providing gold segmentation")
      ->required();
  analyze->add_option("--annotations", an_annotations, "gold intra-word structures");

  auto* selfcheck = app.add_subcommand("selfcheck", "oracle agreement suite");
  int max_n = 8, seeds = 100;
  bool inject_fault = false;
  selfcheck->add_option("--max-n", max_n, "largest sentence length")
      ->check(CLI::Range(1, oracle::kMaxN));
  selfcheck->add_option("--seeds", seeds, "instances per length")
      ->check(CLI::PositiveNumber);
  selfcheck->add_flag("--inject-inside-fault", inject_fault,
                      "flip one chart score to demonstrate failure reporting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(train))
      return cmd_train(cfg_path, train_path, dev_path, mode_flag, seed_flag, out_prefix);
    if (app.got_subcommand(parse))
      return cmd_parse(model_path, input_path, output_path, word_output_path, gold_seg,
                       jobs);
    if (app.got_subcommand(evaluate))
      return cmd_evaluate(gold_path, pred_path, punct_flag);
    if (app.got_subcommand(analyze))
      return cmd_analyze(an_models, an_preds, an_gold_seg, an_annotations);
    if (app.got_subcommand(selfcheck))
      return cmd_selfcheck(max_n, seeds, inject_fault);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheck;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
