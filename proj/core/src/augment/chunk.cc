#include "drama/augment/chunk.h"

#include <algorithm>

#include "drama/encoder/tokenizer.h"
#include "drama/util/error.h"

namespace drama::augment {
namespace {

bool ends_sentence(const std::string& piece) {
  if (piece.empty()) return false;
  const char c = piece.back();
  if (c == '.' || c == '!' || c == '?') return true;
  for (std::string_view mark : {"\xE3\x80\x82", "\xEF\xBC\x9F", "\xEF\xBC\x81"}) {  // 。？！
    if (piece.size() >= mark.size() && std::string_view(piece).substr(piece.size() - mark.size()) == mark)
      return true;
  }
  return false;
}

}  // namespace

std::vector<Chunk> chunk_corpus(const std::vector<data::Document>& docs, std::size_t max_tokens) {
  if (max_tokens == 0) throw ConfigError("chunk: max_tokens must be >= 1");
  std::vector<Chunk> out;
  for (const auto& d : docs) {
    const auto pieces = encoder::split_pieces(d.text);
    for (std::size_t start = 0, ord = 0; start < pieces.size(); start += max_tokens, ++ord) {
      const std::size_t end = std::min(pieces.size(), start + max_tokens);
      out.push_back({d.id + "#" + std::to_string(ord), encoder::join_pieces(pieces, start, end), end - start, d.lang});
    }
  }
  return out;
}

std::vector<data::Document> to_documents(const std::vector<Chunk>& chunks) {
  std::vector<data::Document> out;
  out.reserve(chunks.size());
  for (const auto& c : chunks) out.push_back({c.id, c.text, c.lang});
  return out;
}

std::vector<Chunk> from_documents(const std::vector<data::Document>& docs) {
  std::vector<Chunk> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back({d.id, d.text, encoder::split_pieces(d.text).size(), d.lang});
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  const auto pieces = encoder::split_pieces(text);
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (ends_sentence(pieces[i]) || i + 1 == pieces.size()) {
      out.push_back(encoder::join_pieces(pieces, start, i + 1));
      start = i + 1;
    }
  }
  return out;
}

std::string crop_query(std::string_view text, std::size_t start_sentence, std::size_t num_sentences) {
  const auto sents = split_sentences(text);
  if (sents.empty()) return std::string(text);
  if (sents.size() < 2) return sents.front();
  const std::size_t start = std::min(start_sentence, sents.size() - 1);
  const std::size_t end = std::min(sents.size(), start + std::max<std::size_t>(num_sentences, 1));
  return encoder::join_pieces(sents, start, end);
}

std::string crop_query_random(std::string_view text, Rng& rng, std::size_t max_sentences) {
  const auto sents = split_sentences(text);
  const std::size_t n = std::max<std::size_t>(sents.size(), 1);
  const std::size_t start = uniform_index(rng, n);
  const std::size_t len = 1 + uniform_index(rng, std::max<std::size_t>(max_sentences, 1));
  return crop_query(text, start, len);
}

}  // namespace drama::augment
