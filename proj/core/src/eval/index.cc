#include "drama/eval/index.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "drama/util/error.h"
#include "drama/util/io.h"

static_assert(std::endian::native == std::endian::little, "index I/O assumes little-endian");

namespace drama::eval {
namespace {

constexpr char kMagic[8] = {'D', 'R', 'A', 'M', 'A', 'I', 'D', 'X'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;
  std::string where;

  void need(std::size_t n) {
    if (bytes.size() - pos < n) throw DataError(where + ": truncated index file");
  }
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof v);
    pos += sizeof v;
    return v;
  }
};

bool hit_before(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

}  // namespace

ExactIndex ExactIndex::build(std::vector<std::pair<std::string, std::vector<double>>> pairs) {
  ExactIndex idx;
  if (pairs.empty()) return idx;
  idx.dim_ = pairs.front().second.size();
  if (idx.dim_ == 0) throw DataError("index: zero-dimensional embedding for '" + pairs.front().first + "'");
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  idx.ids_.reserve(pairs.size());
  idx.rows_.reserve(pairs.size() * idx.dim_);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [id, v] = pairs[i];
    if (i > 0 && pairs[i - 1].first == id) throw DataError("index: duplicate id '" + id + "'");
    if (v.size() != idx.dim_) {
      throw DataError("index: '" + id + "' has dimension " + std::to_string(v.size()) + ", expected " +
                      std::to_string(idx.dim_));
    }
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw DataError("index: zero or non-finite vector for '" + id + "'");
    idx.ids_.push_back(id);
    for (double x : v) idx.rows_.push_back(x / norm);
  }
  return idx;
}

std::vector<Hit> ExactIndex::search_topk(std::span<const double> query, std::size_t k) const {
  if (k < 1 || k > size()) {
    throw ConfigError("search k=" + std::to_string(k) + " outside [1, " + std::to_string(size()) + "]");
  }
  if (query.size() != dim_) {
    throw ConfigError("query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                      std::to_string(dim_));
  }
  double sq = 0.0;
  for (double x : query) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DataError("search: zero or non-finite query vector");

  std::vector<Hit> all(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const double* r = rows_.data() + i * dim_;
    double dot = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) dot += r[j] * query[j];
    all[i] = Hit{ids_[i], std::clamp(dot / norm, -1.0, 1.0)};
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), hit_before);
  all.resize(k);
  return all;
}

void ExactIndex::save(const std::filesystem::path& path) const {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, size());
  put<std::uint64_t>(out, dim_);
  for (std::size_t i = 0; i < size(); ++i) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ids_[i].size()));
    out += ids_[i];
    out.append(reinterpret_cast<const char*>(rows_.data() + i * dim_), dim_ * sizeof(double));
  }
  write_text_file(path, out);
}

ExactIndex ExactIndex::load(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError(path.string() + ": not an index file (bad magic)");
  }
  Reader rd{bytes, sizeof kMagic, path.string()};
  const auto version = rd.get<std::uint32_t>();
  if (version != kVersion) throw DataError(path.string() + ": unsupported index version " + std::to_string(version));
  const auto n = rd.get<std::uint64_t>();
  const auto dim = rd.get<std::uint64_t>();
  ExactIndex idx;
  idx.dim_ = dim;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len = rd.get<std::uint32_t>();
    rd.need(len);
    idx.ids_.emplace_back(bytes.data() + rd.pos, len);
    rd.pos += len;
    rd.need(dim * sizeof(double));
    const std::size_t at = idx.rows_.size();
    idx.rows_.resize(at + dim);
    std::memcpy(idx.rows_.data() + at, bytes.data() + rd.pos, dim * sizeof(double));
    rd.pos += dim * sizeof(double);
    if (i > 0 && !(idx.ids_[i - 1] < idx.ids_[i])) throw DataError(path.string() + ": ids not sorted and unique");
  }
  if (rd.pos != bytes.size()) throw DataError(path.string() + ": trailing bytes in index file");
  return idx;
}

}  // namespace drama::eval
