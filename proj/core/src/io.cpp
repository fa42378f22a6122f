#include "chardep/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace chardep {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

int parse_int(const std::string& s, int line_no, const char* what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(std::string("non-integer ") + what + " '" + s + "'", line_no);
  return value;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// 17 significant digits round-trips doubles exactly.
std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ParseError::ParseError(const std::string& what, int line_no)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
      line(line_no) {}

namespace {

struct ConllRow {
  std::string form;
  int head;
  std::string deprel;
  int line_no;
};

ConllSentence finish_sentence(const std::vector<ConllRow>& rows, LabelSet& labels,
                              int first_line) {
  const int W = static_cast<int>(rows.size());
  std::u32string text;
  std::vector<int> lengths;
  for (const auto& r : rows) {
    const std::u32string form = utf8_decode(r.form);
    if (form.empty()) throw ParseError("empty form", r.line_no);
    text += form;
    lengths.push_back(static_cast<int>(form.size()));
  }
  ConllSentence out;
  out.sent = CharSentence(text);
  out.tree = WordTree(Segmentation::from_lengths(lengths));
  out.forms.assign(W + 1, "");
  for (int w = 1; w <= W; ++w) {
    const auto& r = rows[w - 1];
    if (r.head < 0 || r.head > W)
      throw ParseError("head out of range: " + std::to_string(r.head), r.line_no);
    out.tree.whead[w] = r.head;
    out.tree.wlabel[w] = labels.intern(r.deprel);
    out.forms[w] = r.form;
  }
  if (!heads_single_rooted_tree(out.tree.whead))
    throw ParseError("rows do not form a tree", first_line);
  out.projective = validate_heads(out.tree.whead);
  return out;
}

}  // namespace

std::vector<ConllSentence> read_conll(const std::string& path, LabelSet& labels) {
  std::ifstream in = open_in(path);
  std::vector<ConllSentence> corpus;
  std::vector<ConllRow> rows;
  std::string line;
  int line_no = 0, first_line = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!rows.empty()) {
        corpus.push_back(finish_sentence(rows, labels, first_line));
        rows.clear();
      }
      continue;
    }
    if (rows.empty()) first_line = line_no;
    const auto cols = split_tabs(line);
    if (cols.size() != 10)
      throw ParseError("expected 10 tab-separated columns, got " +
                           std::to_string(cols.size()),
                       line_no);
    const int id = parse_int(cols[0], line_no, "id");
    if (id != static_cast<int>(rows.size()) + 1)
      throw ParseError("ids must count from 1", line_no);
    rows.push_back({cols[1], parse_int(cols[6], line_no, "head"), cols[7], line_no});
  }
  if (!rows.empty()) corpus.push_back(finish_sentence(rows, labels, first_line));
  return corpus;
}

void write_conll(const std::string& path, const std::vector<ConllSentence>& corpus,
                 const LabelSet& labels) {
  std::ofstream out = open_out(path);
  for (const auto& s : corpus) {
    for (int w = 1; w <= s.tree.num_words(); ++w) {
      out << w << '\t' << s.forms[w] << "\t_\t_\t_\t_\t" << s.tree.whead[w] << '\t'
          << labels.name_of(s.tree.wlabel[w]) << "\t_\t_\n";
    }
    out << '\n';
  }
}

std::vector<std::string> forms_from_segmentation(const CharSentence& sent,
                                                 const Segmentation& seg) {
  std::vector<std::string> forms(seg.num_words() + 1);
  for (int w = 1; w <= seg.num_words(); ++w) {
    const Span& sp = seg.spans[w - 1];
    std::u32string form(sent.chars.begin() + sp.begin, sent.chars.begin() + sp.end + 1);
    forms[w] = utf8_encode(form);
  }
  return forms;
}

std::vector<CharTreeSentence> read_char_trees(const std::string& path, LabelSet& labels) {
  std::ifstream in = open_in(path);
  std::vector<CharTreeSentence> corpus;
  std::u32string text;
  std::vector<Index> heads{-1};
  std::vector<int> label_ids{-1};
  std::string line;
  int line_no = 0;
  auto flush = [&](int at_line) {
    if (text.empty()) return;
    const int n = static_cast<int>(text.size());
    for (Index m = 1; m <= n; ++m)
      if (heads[m] < 0 || heads[m] > n)
        throw ParseError("head out of range: " + std::to_string(heads[m]), at_line);
    CharTreeSentence s;
    s.sent = CharSentence(text);
    s.tree.head = heads;
    s.tree.label = label_ids;
    corpus.push_back(std::move(s));
    text.clear();
    heads.assign(1, -1);
    label_ids.assign(1, -1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush(line_no);
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 4)
      throw ParseError("expected 4 tab-separated columns, got " +
                           std::to_string(cols.size()),
                       line_no);
    const int id = parse_int(cols[0], line_no, "id");
    if (id != static_cast<int>(text.size()) + 1)
      throw ParseError("ids must count from 1", line_no);
    const std::u32string ch = utf8_decode(cols[1]);
    if (ch.size() != 1) throw ParseError("char column must hold one character", line_no);
    text += ch;
    heads.push_back(parse_int(cols[2], line_no, "head"));
    label_ids.push_back(labels.intern(cols[3]));
  }
  flush(line_no);
  return corpus;
}

void write_char_trees(const std::string& path,
                      const std::vector<CharTreeSentence>& corpus,
                      const LabelSet& labels) {
  std::ofstream out = open_out(path);
  for (const auto& s : corpus) {
    for (Index c = 1; c <= s.sent.size(); ++c) {
      out << c << '\t' << utf8_encode(s.sent.chars[c]) << '\t' << s.tree.head[c]
          << '\t' << labels.name_of(s.tree.label[c]) << '\n';
    }
    out << '\n';
  }
}

std::map<std::u32string, IntraStructure> read_intra_annotations(const std::string& path) {
  std::ifstream in = open_in(path);
  std::map<std::u32string, IntraStructure> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 2) throw ParseError("expected FORM<TAB>heads", line_no);
    const std::u32string form = utf8_decode(cols[0]);
    IntraStructure st;
    std::stringstream heads(cols[1]);
    std::string tok;
    while (std::getline(heads, tok, ','))
      st.head.push_back(parse_int(tok, line_no, "intra head"));
    if (st.length() != static_cast<int>(form.size()))
      throw ParseError("annotation length conflicts with word length", line_no);
    if (!st.valid())
      throw ParseError("annotation is not a single-root tree", line_no);
    out[form] = std::move(st);
  }
  return out;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in = open_in(path);
  TrainConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string flat = line;
    for (char& c : flat)
      if (c == '=') c = ' ';
    std::istringstream is(flat);
    std::string key, value;
    if (!(is >> key) || key[0] == '#') continue;
    if (!(is >> value)) throw ParseError("missing value for '" + key + "'", line_no);
    try {
      if (key == "embedding_dim") {
        cfg.embedding_dim = std::stoi(value);
      } else if (key == "hidden_dim") {
        cfg.hidden_dim = std::stoi(value);
      } else if (key == "learning_rate") {
        cfg.learning_rate = std::stod(value);
      } else if (key == "lr_decay") {
        cfg.lr_decay = std::stod(value);
      } else if (key == "clip_norm") {
        cfg.clip_norm = std::stod(value);
      } else if (key == "epochs") {
        cfg.epochs = std::stoi(value);
      } else if (key == "batch_size") {
        cfg.batch_size = std::stoi(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "mode") {
        const auto mode = parse_train_mode(value);
        if (!mode) throw ParseError("unknown mode '" + value + "'", line_no);
        cfg.mode = *mode;
      } else {
        throw ParseError("unknown config key '" + key + "'", line_no);
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("bad value for '" + key + "'", line_no);
    }
  }
  return cfg;
}

void save_model(const std::string& path, const ReferenceScorer& scorer,
                TrainMode mode) {
  std::ofstream out = open_out(path);
  out << "chardep-model 1\n";
  out << "mode " << to_string(mode) << '\n';
  out << "c2f " << (scorer.is_c2f() ? 1 : 0) << '\n';
  out << "embedding_dim " << scorer.dims().embedding << '\n';
  out << "hidden_dim " << scorer.dims().hidden << '\n';
  out << "seed " << scorer.seed() << '\n';
  out << "labels " << scorer.labels().size() << '\n';
  for (const auto& name : scorer.labels().names()) out << name << '\n';
  out << "root_label " << scorer.labels().name_of(scorer.labels().root_id()) << '\n';
  out << "vocab " << scorer.vocab().size() << '\n';
  for (char32_t c : scorer.vocab()) out << static_cast<std::uint32_t>(c) << '\n';
  const auto& p = scorer.params();
  out << "params " << p.size() << '\n';
  for (double v : p) out << fmt_double(v) << '\n';
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "chardep-model" || version != 1)
    throw std::runtime_error(path + ": not a chardep model file");
  auto expect = [&](const char* key) {
    std::string k;
    in >> k;
    if (k != key) throw std::runtime_error(path + ": expected '" + key + "'");
  };
  LoadedModel out;
  expect("mode");
  std::string mode_name;
  in >> mode_name;
  const auto mode = parse_train_mode(mode_name);
  if (!mode) throw std::runtime_error(path + ": unknown mode " + mode_name);
  out.mode = *mode;
  expect("c2f");
  int c2f = 0;
  in >> c2f;
  ReferenceScorer::Dims dims;
  expect("embedding_dim");
  in >> dims.embedding;
  expect("hidden_dim");
  in >> dims.hidden;
  expect("seed");
  std::uint64_t seed = 0;
  in >> seed;
  expect("labels");
  int n_labels = 0;
  in >> n_labels;
  std::vector<std::string> names(n_labels);
  for (auto& s : names) in >> s;
  if (n_labels < 1 || names[0] != LabelSet::kIntraName)
    throw std::runtime_error(path + ": malformed label table");
  expect("root_label");
  std::string root_label;
  in >> root_label;
  LabelSet labels = LabelSet::from_names(names, root_label);
  expect("vocab");
  size_t n_vocab = 0;
  in >> n_vocab;
  std::vector<char32_t> vocab(n_vocab);
  for (auto& c : vocab) {
    std::uint32_t v = 0;
    in >> v;
    c = static_cast<char32_t>(v);
  }
  expect("params");
  size_t n_params = 0;
  in >> n_params;
  out.scorer = std::make_unique<ReferenceScorer>(std::move(vocab), labels, dims,
                                                 c2f != 0, seed);
  if (out.scorer->params().size() != n_params)
    throw std::runtime_error(path + ": parameter count mismatch");
  for (auto& v : out.scorer->params()) in >> v;
  if (!in) throw std::runtime_error(path + ": truncated model file");
  return out;
}

}  // namespace chardep
