#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "drama/util/io.h"

namespace drama::data {

/// One corpus line: {"id", "text", "lang"}.
struct Document {
  std::string id;
  std::string text;
  std::string lang = "en";

  friend bool operator==(const Document&, const Document&) = default;
};

/// One query line: {"id", "text"}.
struct Query {
  std::string id;
  std::string text;

  friend bool operator==(const Query&, const Query&) = default;
};

Json to_json(const Document& d);
Document document_from_json(const Json& j);
Json to_json(const Query& q);
Query query_from_json(const Json& j);

/// Throw DataError on malformed lines or duplicate ids.
std::vector<Document> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs);
std::vector<Query> read_queries(const std::filesystem::path& path);
void write_queries(const std::filesystem::path& path, const std::vector<Query>& queries);

}  // namespace drama::data
