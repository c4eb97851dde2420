#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "drama/data/corpus.h"
#include "drama/util/rng.h"

namespace drama::augment {

struct Chunk {
  std::string id;
  std::string text;
  std::size_t token_count = 0;
  std::string lang = "en";

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// Greedy left-to-right segmentation into runs of at most max_tokens
/// whitespace pieces. Ids are "{doc_id}#{ordinal}". Empty documents yield
/// no chunks. Throws ConfigError for max_tokens == 0.
std::vector<Chunk> chunk_corpus(const std::vector<data::Document>& docs, std::size_t max_tokens);

/// Chunks travel as corpus lines ({"id", "text", "lang"}).
std::vector<data::Document> to_documents(const std::vector<Chunk>& chunks);
std::vector<Chunk> from_documents(const std::vector<data::Document>& docs);

/// Sentence boundaries fall after a piece ending in . ! ? or the
/// full-width 。？！ marks. Joining the result with single spaces gives back
/// the whitespace-normalized text.
std::vector<std::string> split_sentences(std::string_view text);

/// Contiguous span of num_sentences starting at start_sentence, clamped to
/// the chunk. A chunk with fewer than two sentences is returned whole.
std::string crop_query(std::string_view text, std::size_t start_sentence, std::size_t num_sentences);

/// Seeded variant: start uniform over the sentences, length uniform in
/// [1, max_sentences].
std::string crop_query_random(std::string_view text, Rng& rng, std::size_t max_sentences = 3);

}  // namespace drama::augment
