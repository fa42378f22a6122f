#include "chardep/types.hpp"

#include <algorithm>
#include <sstream>

namespace chardep {

CharSentence::CharSentence(std::u32string_view text) : chars(1, U'\0') {
  chars.insert(chars.end(), text.begin(), text.end());
  if (text.empty()) throw std::invalid_argument("empty sentence");
}

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  size_t i = 0;
  auto bad = [&] { throw std::invalid_argument("invalid UTF-8 at byte " + std::to_string(i)); };
  while (i < s.size()) {
    unsigned char b = s[i];
    char32_t cp = 0;
    int extra = 0;
    if (b < 0x80) {
      cp = b;
    } else if ((b & 0xE0) == 0xC0) {
      cp = b & 0x1F;
      extra = 1;
    } else if ((b & 0xF0) == 0xE0) {
      cp = b & 0x0F;
      extra = 2;
    } else if ((b & 0xF8) == 0xF0) {
      cp = b & 0x07;
      extra = 3;
    } else {
      bad();
    }
    if (i + extra >= s.size()) bad();
    for (int k = 1; k <= extra; ++k) {
      unsigned char c = s[i + k];
      if ((c & 0xC0) != 0x80) bad();
      cp = (cp << 6) | (c & 0x3F);
    }
    i += extra + 1;
    out.push_back(cp);
  }
  return out;
}

std::string utf8_encode(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string utf8_encode(std::u32string_view s) {
  std::string out;
  for (char32_t c : s) out += utf8_encode(c);
  return out;
}

Segmentation Segmentation::from_lengths(const std::vector<int>& lengths) {
  Segmentation seg;
  Index pos = 1;
  for (int len : lengths) {
    if (len < 1) throw std::invalid_argument("word length < 1");
    seg.spans.push_back({pos, pos + len - 1});
    pos += len;
  }
  return seg;
}

bool Segmentation::valid() const {
  if (spans.empty()) return false;
  Index expect = 1;
  for (const Span& s : spans) {
    if (s.begin != expect || s.end < s.begin) return false;
    expect = s.end + 1;
  }
  return true;
}

std::vector<int> Segmentation::word_of() const {
  std::vector<int> w(num_chars() + 1, 0);
  for (int i = 0; i < num_words(); ++i)
    for (Index c = spans[i].begin; c <= spans[i].end; ++c) w[c] = i + 1;
  return w;
}

std::string segmentation_to_bmes(const Segmentation& seg) {
  std::string tags;
  for (const Span& s : seg.spans) {
    if (s.length() == 1) {
      tags += 'S';
    } else {
      tags += 'B';
      tags.append(s.length() - 2, 'M');
      tags += 'E';
    }
  }
  return tags;
}

Segmentation segmentation_from_bmes(std::string_view tags) {
  Segmentation seg;
  Index pos = 1;
  Index begin = 0;
  for (char t : tags) {
    switch (t) {
      case 'S':
        if (begin != 0) throw std::invalid_argument("S inside a word");
        seg.spans.push_back({pos, pos});
        break;
      case 'B':
        if (begin != 0) throw std::invalid_argument("B inside a word");
        begin = pos;
        break;
      case 'M':
        if (begin == 0) throw std::invalid_argument("M outside a word");
        break;
      case 'E':
        if (begin == 0) throw std::invalid_argument("E outside a word");
        seg.spans.push_back({begin, pos});
        begin = 0;
        break;
      default:
        throw std::invalid_argument("unknown BMES tag");
    }
    ++pos;
  }
  if (begin != 0) throw std::invalid_argument("unterminated word");
  return seg;
}

LabelSet::LabelSet(const std::vector<std::string>& syntactic,
                   const std::string& root_label) {
  root_id_ = intern(root_label);
  for (const std::string& s : syntactic) intern(s);
}

LabelSet LabelSet::from_names(const std::vector<std::string>& names,
                              const std::string& root_label) {
  if (names.empty() || names[0] != kIntraName)
    throw std::invalid_argument("label table must start with the intra label");
  LabelSet out;
  for (size_t i = 1; i < names.size(); ++i) out.intern(names[i]);
  if (out.size() != static_cast<int>(names.size()))
    throw std::invalid_argument("duplicate label names");
  out.root_id_ = out.id_of(root_label);
  if (out.root_id_ < 0) throw std::invalid_argument("root label not in table");
  return out;
}

int LabelSet::intern(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  return id;
}

int LabelSet::id_of(const std::string& name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? -1 : it->second;
}

namespace {

bool heads_projective_impl(const std::vector<Index>& head);

}  // namespace

bool heads_single_rooted_tree(const std::vector<Index>& head) {
  const int n = static_cast<int>(head.size()) - 1;
  if (n < 1) return false;
  int roots = 0;
  for (Index m = 1; m <= n; ++m) {
    if (head[m] < 0 || head[m] > n || head[m] == m) return false;
    if (head[m] == 0) ++roots;
  }
  if (roots != 1) return false;
  // Acyclic: every node reaches 0.
  for (Index m = 1; m <= n; ++m) {
    Index c = m;
    int steps = 0;
    while (c != 0) {
      c = head[c];
      if (++steps > n) return false;
    }
  }
  return true;
}

namespace {

bool heads_projective_impl(const std::vector<Index>& head) {
  const int n = static_cast<int>(head.size()) - 1;
  for (Index m = 1; m <= n; ++m) {
    Index a = std::min<Index>(head[m], m), b = std::max<Index>(head[m], m);
    for (Index m2 = 1; m2 <= n; ++m2) {
      Index c = std::min<Index>(head[m2], m2), d = std::max<Index>(head[m2], m2);
      // Crossing: a < c < b < d with all four distinct span endpoints.
      if (a < c && c < b && b < d) return false;
    }
  }
  return true;
}

}  // namespace

bool validate_heads(const std::vector<Index>& head) {
  return heads_single_rooted_tree(head) && heads_projective_impl(head);
}

bool validate_char_tree(const CharTree& tree) {
  if (tree.head.size() != tree.label.size()) return false;
  return validate_heads(tree.head);
}

bool validate_word_tree(const WordTree& tree) {
  if (!tree.seg.valid()) return false;
  if (static_cast<int>(tree.whead.size()) != tree.num_words() + 1) return false;
  return validate_heads(tree.whead);
}

ArcScores::ArcScores(int n, double fill) : n_(n), data_((n + 1) * (n + 1), fill) {
  for (Index i = 0; i <= n; ++i) (*this)(i, i) = kMaskedScore;
  for (Index i = 0; i <= n; ++i) (*this)(i, 0) = kMaskedScore;
}

C2fArcScores::C2fArcScores(int n, double fill) : intra(n, fill), inter(n, fill) {
  mask_intra_root();
}

void C2fArcScores::mask_intra_root() {
  for (Index m = 0; m <= intra.size(); ++m) intra(0, m) = kMaskedScore;
}

LabelScores::LabelScores(int n, int num_labels, double fill)
    : n_(n), labels_(num_labels), data_((n + 1) * (n + 1) * num_labels, fill) {}

int IntraStructure::root_pos() const {
  int root = -1;
  for (int p = 1; p <= length(); ++p) {
    if (head[p - 1] == 0) {
      if (root != -1) return -1;
      root = p;
    }
  }
  return root;
}

bool IntraStructure::valid() const {
  const int len = length();
  if (len < 1 || root_pos() < 0) return false;
  for (int p = 1; p <= len; ++p) {
    int h = head[p - 1];
    if (h < 0 || h > len || h == p) return false;
    int c = p, steps = 0;
    while (c != 0) {
      c = head[c - 1];
      if (++steps > len) return false;
    }
  }
  return true;
}

std::string IntraStructure::shape() const {
  std::ostringstream os;
  for (int p = 0; p < length(); ++p) {
    if (p) os << ' ';
    if (head[p] == 0)
      os << 'R';
    else
      os << head[p];
  }
  return os.str();
}

ForestSpec::ForestSpec(Segmentation s, std::vector<Index> heads)
    : seg(std::move(s)), whead(std::move(heads)) {
  if (!seg.valid()) throw std::invalid_argument("invalid segmentation");
  word_of = seg.word_of();
  if (!whead.empty()) {
    if (static_cast<int>(whead.size()) != seg.num_words() + 1)
      throw std::invalid_argument("whead size mismatch");
    root_word = 0;
    for (int w = 1; w <= seg.num_words(); ++w)
      if (whead[w] == 0) root_word = w;
    if (root_word == 0) throw std::invalid_argument("word tree has no root");
  }
}

ForestSpec ForestSpec::segmentation_only(Segmentation s) {
  ForestSpec spec;
  spec.seg = std::move(s);
  if (!spec.seg.valid()) throw std::invalid_argument("invalid segmentation");
  spec.word_of = spec.seg.word_of();
  return spec;
}

Index ForestSpec::fixed_root_char(int w) const {
  auto it = fixed.find(w);
  if (it == fixed.end()) return -1;
  return seg.spans[w - 1].begin + it->second.root_pos() - 1;
}

bool ForestSpec::admissible(Index h, Index m) const {
  const int wh = word_of[h], wm = word_of[m];
  if (h == 0) {
    if (has_whead() && wm != root_word) return false;
    Index pinned = fixed_root_char(wm);
    return pinned < 0 || m == pinned;
  }
  if (wh == wm) {
    // Intra arc; a pinned structure admits exactly its own arcs.
    auto it = fixed.find(wh);
    if (it == fixed.end()) return true;
    const Span& sp = seg.spans[wh - 1];
    return it->second.head[m - sp.begin] == h - sp.begin + 1;
  }
  if (has_whead() && whead[wm] != wh) return false;
  Index pinned_h = fixed_root_char(wh);
  if (pinned_h >= 0 && h != pinned_h) return false;
  Index pinned_m = fixed_root_char(wm);
  if (pinned_m >= 0 && m != pinned_m) return false;
  return true;
}

ArcScores ForestSpec::mask(const ArcScores& scores) const {
  const int n = scores.size();
  if (n != num_chars()) throw std::invalid_argument("score size mismatch");
  ArcScores out(n, kMaskedScore);
  for (Index h = 0; h <= n; ++h)
    for (Index m = 1; m <= n; ++m)
      if (h != m && admissible(h, m)) out(h, m) = scores(h, m);
  return out;
}

bool arc_admissible(const ForestSpec& spec, Index h, Index m) {
  const int n = spec.num_chars();
  if (h < 0 || h > n || m < 1 || m > n || h == m)
    throw std::out_of_range("arc index out of range");
  return spec.admissible(h, m);
}

}  // namespace chardep
