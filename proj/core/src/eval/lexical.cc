#include "drama/eval/lexical.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "drama/encoder/tokenizer.h"

namespace drama::eval {
namespace {

std::set<std::string> piece_set(std::string_view text) {
  std::set<std::string> out;
  for (const auto& p : encoder::split_pieces(text)) {
    std::string n = encoder::normalize_piece(p);
    if (!n.empty()) out.insert(std::move(n));
  }
  return out;
}

}  // namespace

LexicalEmbedder::LexicalEmbedder(std::span<const std::string> corpus, LexicalOptions opts) : opts_(opts) {
  std::map<std::string, std::size_t> df;
  for (const auto& text : corpus)
    for (const auto& w : piece_set(text)) ++df[w];
  vocab_.reserve(df.size());
  idf_.push_back(1.0);
  const double n = static_cast<double>(corpus.size());
  for (const auto& [w, c] : df) {
    index_.emplace(w, vocab_.size() + 1);
    vocab_.push_back(w);
    idf_.push_back(opts_.idf ? std::log((n + 1.0) / (static_cast<double>(c) + 0.5)) : 1.0);
  }
}

encoder::Embedding LexicalEmbedder::embed(std::string_view text, bool* truncated) const {
  if (truncated) *truncated = false;
  encoder::Embedding v(dim(), 0.0);
  for (const auto& p : encoder::split_pieces(text)) {
    const std::string n = encoder::normalize_piece(p);
    if (n.empty()) continue;
    auto it = index_.find(n);
    v[it == index_.end() ? 0 : it->second] += 1.0;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    v[i] = (opts_.log_tf ? 1.0 + std::log(v[i]) : v[i]) * idf_[i];
  }
  return v;
}

std::size_t token_overlap(std::string_view a, std::string_view b) {
  const auto sa = piece_set(a);
  const auto sb = piece_set(b);
  std::size_t n = 0;
  for (const auto& w : sa) n += sb.count(w);
  return n;
}

}  // namespace drama::eval
