#include "drama/encoder/tokenizer.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "drama/encoder/config.h"
#include "drama/util/error.h"
#include "drama/util/io.h"
#include "drama/util/rng.h"

namespace drama::encoder {

TokenSequence TokenSequence::unpadded(std::vector<std::int32_t> ids) {
  TokenSequence s;
  s.mask.assign(ids.size(), 1);
  s.ids = std::move(ids);
  return s;
}

std::size_t TokenSequence::active() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void TokenSequence::validate(const EncoderConfig& cfg) const {
  if (ids.size() != mask.size()) {
    throw ConfigError("token sequence: " + std::to_string(ids.size()) + " ids but " +
                      std::to_string(mask.size()) + " mask entries");
  }
  if (ids.size() > cfg.max_positions) {
    throw ConfigError("token sequence of length " + std::to_string(ids.size()) +
                      " exceeds max_positions " + std::to_string(cfg.max_positions));
  }
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw ConfigError("token id " + std::to_string(id) + " outside vocabulary of " +
                        std::to_string(cfg.vocab_size));
    }
  }
  if (active() == 0) throw DataError("token sequence has no unmasked position");
}

std::vector<std::string> split_pieces(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_pieces(std::span<const std::string> pieces, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += pieces[i];
  }
  return out;
}

namespace {

constexpr std::string_view kAsciiPunct = ".,!?;:\"'()[]{}";
constexpr std::string_view kWideMarks[] = {"\xE3\x80\x82", "\xEF\xBC\x9F", "\xEF\xBC\x81"};  // 。？！

}  // namespace

std::string normalize_piece(std::string_view piece) {
  bool changed = true;
  while (changed && !piece.empty()) {
    changed = false;
    if (kAsciiPunct.find(piece.front()) != std::string_view::npos) {
      piece.remove_prefix(1);
      changed = true;
      continue;
    }
    if (kAsciiPunct.find(piece.back()) != std::string_view::npos) {
      piece.remove_suffix(1);
      changed = true;
      continue;
    }
    for (auto mark : kWideMarks) {
      if (piece.size() >= mark.size() && piece.substr(piece.size() - mark.size()) == mark) {
        piece.remove_suffix(mark.size());
        changed = true;
        break;
      }
    }
  }
  std::string out(piece);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

TokenSequence Tokenizer::encode(std::string_view text, std::size_t max_positions,
                                bool* truncated) const {
  if (max_positions < 1) throw ConfigError("encode: max_positions must be >= 1");
  const auto pieces = split_pieces(text);
  const std::size_t keep = std::min(pieces.size(), max_positions - 1);
  if (truncated) *truncated = keep < pieces.size();
  std::vector<std::int32_t> ids;
  ids.reserve(keep + 1);
  for (std::size_t i = 0; i < keep; ++i) ids.push_back(id_of(pieces[i]));
  ids.push_back(kEos);
  return TokenSequence::unpadded(std::move(ids));
}

WordTokenizer::WordTokenizer(std::size_t vocab_size, std::vector<std::string> words)
    : vocab_size_(vocab_size), words_(std::move(words)) {
  if (vocab_size_ < 3) throw ConfigError("tokenizer: vocab_size must be >= 3");
  if (words_.size() > vocab_size_ - 3) words_.resize(vocab_size_ - 3);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    index_.emplace(words_[i], static_cast<std::int32_t>(i + 2));
  }
}

std::int32_t WordTokenizer::id_of(std::string_view piece) const {
  std::string norm = normalize_piece(piece);
  if (norm.empty()) norm = std::string(piece);
  if (auto it = index_.find(norm); it != index_.end()) return it->second;
  const std::uint64_t bucket = fnv1a64(norm) % num_buckets();
  return static_cast<std::int32_t>(2 + words_.size() + bucket);
}

WordTokenizer WordTokenizer::from_vocab_file(const std::filesystem::path& path,
                                             std::size_t vocab_size) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return WordTokenizer(vocab_size, std::move(words));
}

std::vector<std::string> WordTokenizer::build_vocab(std::span<const std::string> texts,
                                                    std::size_t max_words) {
  std::map<std::string, std::size_t> freq;
  for (const auto& t : texts) {
    for (const auto& p : split_pieces(t)) {
      auto n = normalize_piece(p);
      if (!n.empty()) ++freq[n];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < items.size() && i < max_words; ++i) out.push_back(items[i].first);
  return out;
}

void WordTokenizer::save_vocab(const std::filesystem::path& path) const {
  std::string text;
  for (const auto& w : words_) text += w + "\n";
  write_text_file(path, text);
}

}  // namespace drama::encoder
