#include "drama/eval/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "drama/util/error.h"

namespace drama::eval {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string f;
  while (in >> f) out.push_back(f);
  return out;
}

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

template <class T>
bool parse_num(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

std::vector<std::string> lines_of(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

double dcg(const std::vector<int>& grades, std::size_t k) {
  double s = 0.0;
  const std::size_t n = std::min(k, grades.size());
  for (std::size_t r = 0; r < n; ++r) {
    s += (std::exp2(static_cast<double>(grades[r])) - 1.0) / std::log2(static_cast<double>(r) + 2.0);
  }
  return s;
}

}  // namespace

Qrels read_qrels(const std::filesystem::path& path) {
  Qrels q;
  const auto lines = lines_of(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1) + ": ";
    auto f = split_tab(lines[i]);
    if (f.size() != 3) throw DataError(where + "expected 3 tab-separated fields");
    int grade = 0;
    if (!parse_num(f[2], grade)) throw DataError(where + "relevance '" + f[2] + "' is not an integer");
    if (grade < 0) throw DataError(where + "negative relevance " + f[2]);
    if (f[0].empty() || f[1].empty()) throw DataError(where + "empty id");
    if (!q[f[0]].emplace(f[1], grade).second) {
      throw DataError(where + "duplicate judgment for (" + f[0] + ", " + f[1] + ")");
    }
  }
  return q;
}

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
  std::string out;
  for (const auto& [qid, docs] : qrels) {
    for (const auto& [did, grade] : docs) {
      if (grade < 0) throw DataError("qrels: negative relevance for (" + qid + ", " + did + ")");
      out += qid + "\t" + did + "\t" + std::to_string(grade) + "\n";
    }
  }
  write_text_file(path, out);
}

void write_trec_run(const std::filesystem::path& path, const Run& run, const std::string& tag) {
  std::string out;
  char buf[64];
  for (const auto& [qid, list] : run) {
    for (std::size_t r = 0; r < list.ids.size(); ++r) {
      const double score = r < list.scores.size() ? list.scores[r] : 0.0;
      std::snprintf(buf, sizeof buf, "%.17g", score);
      out += qid + " Q0 " + list.ids[r] + " " + std::to_string(r + 1) + " " + buf + " " + tag + "\n";
    }
  }
  write_text_file(path, out);
}

Run read_trec_run(const std::filesystem::path& path) {
  struct Row {
    std::size_t rank;
    std::string id;
    double score;
  };
  std::map<std::string, std::vector<Row>> rows;
  const auto lines = lines_of(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto f = split_ws(lines[i]);
    if (f.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1) + ": ";
    if (f.size() != 6) throw DataError(where + "expected 6 columns");
    Row row;
    row.id = f[2];
    if (!parse_num(f[3], row.rank)) throw DataError(where + "bad rank '" + f[3] + "'");
    try {
      std::size_t used = 0;
      row.score = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(where + "bad score '" + f[4] + "'");
    }
    rows[f[0]].push_back(std::move(row));
  }
  Run run;
  for (auto& [qid, rs] : rows) {
    std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.rank < b.rank; });
    RankedList& list = run[qid];
    for (auto& r : rs) {
      list.ids.push_back(std::move(r.id));
      list.scores.push_back(r.score);
    }
  }
  return run;
}

double ndcg_query(const std::vector<std::string>& ranked, const std::map<std::string, int>& grades, std::size_t k) {
  std::vector<int> ideal;
  for (const auto& [_, g] : grades) ideal.push_back(g);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal, k);
  if (!(idcg > 0.0)) return -1.0;
  std::vector<int> got;
  for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
    auto it = grades.find(ranked[r]);
    got.push_back(it == grades.end() ? 0 : it->second);
  }
  return dcg(got, k) / idcg;
}

NdcgResult ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
  if (k < 1) throw ConfigError("ndcg: k must be >= 1");
  NdcgResult res;
  double sum = 0.0;
  for (const auto& [qid, list] : run) {
    auto it = qrels.find(qid);
    if (it == qrels.end()) {
      res.missing_qrels.push_back(qid);
      continue;
    }
    const double v = ndcg_query(list.ids, it->second, k);
    if (v < 0.0) {
      res.zero_qrels.push_back(qid);
      continue;
    }
    res.per_query[qid] = v;
  }
  for (const auto& [_, v] : res.per_query) sum += v;
  res.mean = res.per_query.empty() ? 0.0 : sum / static_cast<double>(res.per_query.size());
  return res;
}

Json to_json(const NdcgResult& r) {
  return Json{{"mean", r.mean},
              {"per_query", r.per_query},
              {"scored", r.per_query.size()},
              {"excluded_missing_qrels", r.missing_qrels},
              {"excluded_zero_qrels", r.zero_qrels}};
}

}  // namespace drama::eval
