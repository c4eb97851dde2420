#include "drama/data/corpus.h"

#include <set>

#include "drama/util/error.h"

namespace drama::data {
namespace {

std::string required_string(const Json& j, const char* key, const char* what) {
  if (!j.is_object()) throw DataError(std::string(what) + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw DataError(std::string(what) + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

void check_fields(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw DataError(std::string(what) + ": unknown field '" + it.key() + "'");
  }
}

template <typename T>
void check_unique(const std::vector<T>& rows, const std::filesystem::path& path) {
  std::set<std::string> seen;
  for (const auto& r : rows)
    if (!seen.insert(r.id).second) throw DataError(path.string() + ": duplicate id '" + r.id + "'");
}

}  // namespace

Json to_json(const Document& d) { return Json{{"id", d.id}, {"text", d.text}, {"lang", d.lang}}; }

Document document_from_json(const Json& j) {
  Document d;
  d.id = required_string(j, "id", "document");
  d.text = required_string(j, "text", "document");
  if (j.contains("lang")) d.lang = required_string(j, "lang", "document");
  check_fields(j, {"id", "text", "lang"}, "document");
  if (d.id.empty()) throw DataError("document: empty id");
  return d;
}

Json to_json(const Query& q) { return Json{{"id", q.id}, {"text", q.text}}; }

Query query_from_json(const Json& j) {
  Query q;
  q.id = required_string(j, "id", "query");
  q.text = required_string(j, "text", "query");
  check_fields(j, {"id", "text"}, "query");
  if (q.id.empty()) throw DataError("query: empty id");
  return q;
}

std::vector<Document> read_corpus(const std::filesystem::path& path) {
  std::vector<Document> docs;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    try {
      docs.push_back(document_from_json(j));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  check_unique(docs, path);
  return docs;
}

void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::vector<Json> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(to_json(d));
  write_jsonl(path, rows);
}

std::vector<Query> read_queries(const std::filesystem::path& path) {
  std::vector<Query> qs;
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    try {
      qs.push_back(query_from_json(j));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  check_unique(qs, path);
  return qs;
}

void write_queries(const std::filesystem::path& path, const std::vector<Query>& queries) {
  std::vector<Json> rows;
  rows.reserve(queries.size());
  for (const auto& q : queries) rows.push_back(to_json(q));
  write_jsonl(path, rows);
}

}  // namespace drama::data
