#include "drama/eval/needle.h"

#include <cstdio>
#include <set>

#include "drama/data/pseudo_words.h"
#include "drama/encoder/tokenizer.h"
#include "drama/util/error.h"
#include "drama/util/json_config.h"

namespace drama::eval {
namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

std::string pad_index(std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return buf;
}

int digits(std::size_t n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

}  // namespace

void NeedleTaskSpec::validate() const {
  if (lengths.empty()) throw ConfigError("needle.lengths: empty");
  for (std::size_t i = 1; i < lengths.size(); ++i)
    if (lengths[i] <= lengths[i - 1]) throw ConfigError("needle.lengths: must be strictly ascending");
  if (templates.empty()) throw ConfigError("needle.templates: empty");
  for (const auto& t : templates) {
    if (t.needle.find("{key}") == std::string::npos || t.question.find("{key}") == std::string::npos)
      throw ConfigError("needle.templates: both needle and question need a {key} placeholder");
    const std::size_t n = encoder::split_pieces(t.needle).size();
    if (lengths.front() < n + 1)
      throw ConfigError("needle.lengths: " + std::to_string(lengths.front()) + " is shorter than a needle sentence");
  }
  if (tasks_per_length == 0) throw ConfigError("needle.tasks_per_length: must be >= 1");
  if (filler_vocab < 10) throw ConfigError("needle.filler_vocab: must be >= 10");
}

Json to_json(const NeedleTaskSpec& s) {
  Json templates = Json::array();
  for (const auto& t : s.templates) templates.push_back({{"needle", t.needle}, {"question", t.question}});
  return Json{{"lengths", s.lengths},
              {"seed", s.seed},
              {"templates", templates},
              {"tasks_per_length", s.tasks_per_length},
              {"distractors", s.distractors},
              {"filler_vocab", s.filler_vocab}};
}

NeedleTaskSpec needle_spec_from_json(const Json& j, const NeedleTaskSpec& defaults) {
  if (!j.is_object()) throw ConfigError("needle: expected an object");
  reject_unknown_keys(j, {"lengths", "seed", "templates", "tasks_per_length", "distractors", "filler_vocab"}, "needle");
  NeedleTaskSpec s = defaults;
  read_opt(j, "lengths", s.lengths, "needle");
  read_opt(j, "seed", s.seed, "needle");
  read_opt(j, "tasks_per_length", s.tasks_per_length, "needle");
  read_opt(j, "distractors", s.distractors, "needle");
  read_opt(j, "filler_vocab", s.filler_vocab, "needle");
  if (auto it = j.find("templates"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("needle.templates: expected an array");
    s.templates.clear();
    for (const auto& t : *it) {
      if (!t.is_object()) throw ConfigError("needle.templates: expected objects");
      reject_unknown_keys(t, {"needle", "question"}, "needle.templates[]");
      NeedleTemplate nt;
      read_opt(t, "needle", nt.needle, "needle.templates[]");
      read_opt(t, "question", nt.question, "needle.templates[]");
      s.templates.push_back(std::move(nt));
    }
  }
  s.validate();
  return s;
}

std::vector<NeedleSet> gen_needle_corpus(const NeedleTaskSpec& spec) {
  spec.validate();
  data::PseudoWordGen words(make_rng(spec.seed, "needle.words"));
  const auto filler = words.batch(spec.filler_vocab, 2, 3);
  std::set<std::string> filler_set(filler.begin(), filler.end());
  for (const auto& t : spec.templates) {
    for (const auto* text : {&t.needle, &t.question}) {
      for (const auto& p : encoder::split_pieces(*text)) {
        if (filler_set.count(encoder::normalize_piece(p)))
          throw ConfigError("needle.templates: word '" + p + "' collides with the filler lexicon");
      }
    }
  }
  const data::ZipfSampler zipf(filler.size());

  std::vector<NeedleSet> out;
  const int tw = digits(spec.tasks_per_length - 1);
  const int dw = digits(spec.distractors);
  for (std::size_t len : spec.lengths) {
    NeedleSet set;
    set.length = len;
    Rng rng = make_rng(spec.seed, "needle.L" + std::to_string(len));
    for (std::size_t t = 0; t < spec.tasks_per_length; ++t) {
      const std::string qid = "L" + std::to_string(len) + "-t" + pad_index(t, tw);
      const NeedleTemplate& tpl = spec.templates[uniform_index(rng, spec.templates.size())];
      const std::string key = words.next(3, 3, "x");
      const std::string value = words.next(2, 2, "n");
      const auto needle = encoder::split_pieces(replace_all(replace_all(tpl.needle, "{key}", key), "{value}", value));
      const std::size_t slot = uniform_index(rng, spec.distractors + 1);
      for (std::size_t d = 0; d <= spec.distractors; ++d) {
        const bool has_needle = d == slot;
        const std::size_t n_filler = has_needle ? len - needle.size() : len;
        const std::size_t at = has_needle ? uniform_index(rng, n_filler + 1) : 0;
        std::vector<std::string> pieces;
        pieces.reserve(len);
        for (std::size_t i = 0; i < n_filler; ++i) {
          if (has_needle && i == at) pieces.insert(pieces.end(), needle.begin(), needle.end());
          pieces.push_back(filler[zipf(rng)]);
        }
        if (has_needle && at == n_filler) pieces.insert(pieces.end(), needle.begin(), needle.end());
        const std::string did = qid + "-d" + pad_index(d, dw);
        set.corpus.push_back({did, encoder::join_pieces(pieces, 0, pieces.size()), "en"});
        if (has_needle) set.qrels[qid][did] = 1;
      }
      set.queries.push_back({qid, replace_all(replace_all(tpl.question, "{key}", key), "{value}", value)});
    }
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace drama::eval
