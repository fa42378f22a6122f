#include "toy_grammar.hpp"

#include <random>
#include <string>

namespace chardep::toy {

namespace {

const char* kDet = "abc";
const char* kNoun1 = "ghij";
const char* kNoun2 = "klmn";
const char* kNoun3 = "op";
const char* kVerb1 = "qrs";
const char* kVerb2 = "tuv";
const char* kAdv = "wx";

char pick(const char* set, std::mt19937_64& rng) {
  const size_t len = std::char_traits<char>::length(set);
  return set[std::uniform_int_distribution<size_t>(0, len - 1)(rng)];
}

std::string make_noun(std::mt19937_64& rng) {
  std::string w{pick(kNoun1, rng), pick(kNoun2, rng)};
  if (rng() % 2 == 0) w += pick(kNoun3, rng);
  return w;
}

struct Slot {
  std::string form;
  int head;  // word index, filled later
  const char* label;
};

}  // namespace

std::vector<ConllSentence> generate(int count, std::uint64_t seed, LabelSet& labels,
                                    GrammarConfig config) {
  std::mt19937_64 rng(seed);
  std::vector<ConllSentence> corpus;
  corpus.reserve(count);
  while (static_cast<int>(corpus.size()) < count) {
    std::vector<Slot> slots;
    const bool subj_det = config.with_dets && rng() % 2 == 0;
    const bool has_adv = config.with_adv && rng() % 3 == 0;
    const bool has_obj = rng() % 4 != 0;
    const bool obj_det = has_obj && config.with_dets && rng() % 3 == 0;
    const bool has_punct = config.with_punct && rng() % 2 == 0;

    int subj_noun = -1, obj_noun = -1, verb = -1;
    if (subj_det) slots.push_back({std::string(1, pick(kDet, rng)), -1, "det"});
    subj_noun = static_cast<int>(slots.size());
    slots.push_back({make_noun(rng), -1, "nsubj"});
    if (has_adv) slots.push_back({std::string(1, pick(kAdv, rng)), -1, "advmod"});
    verb = static_cast<int>(slots.size());
    slots.push_back({std::string{pick(kVerb1, rng), pick(kVerb2, rng)}, -1, "root"});
    if (has_obj) {
      if (obj_det) slots.push_back({std::string(1, pick(kDet, rng)), -1, "det"});
      obj_noun = static_cast<int>(slots.size());
      slots.push_back({make_noun(rng), -1, "dobj"});
    }
    if (has_punct) slots.push_back({"z", -1, "punct"});

    for (int i = 0; i < static_cast<int>(slots.size()); ++i) {
      Slot& s = slots[i];
      if (s.label == std::string("det"))
        s.head = (i < verb ? subj_noun : obj_noun) + 1;
      else if (s.label == std::string("root"))
        s.head = 0;
      else
        s.head = verb + 1;
    }

    ConllSentence sent;
    std::u32string text;
    std::vector<int> lengths;
    for (const Slot& s : slots) {
      text += utf8_decode(s.form);
      lengths.push_back(static_cast<int>(s.form.size()));
    }
    sent.sent = CharSentence(text);
    sent.tree = WordTree(Segmentation::from_lengths(lengths));
    sent.forms.assign(slots.size() + 1, "");
    for (int w = 1; w <= static_cast<int>(slots.size()); ++w) {
      sent.tree.whead[w] = slots[w - 1].head;
      sent.tree.wlabel[w] = labels.intern(slots[w - 1].label);
      sent.forms[w] = slots[w - 1].form;
    }
    sent.projective = validate_heads(sent.tree.whead);
    corpus.push_back(std::move(sent));
  }
  return corpus;
}

std::vector<TrainExample> to_examples(const std::vector<ConllSentence>& corpus) {
  std::vector<TrainExample> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back({s.sent, s.tree});
  return out;
}

}  // namespace chardep::toy
