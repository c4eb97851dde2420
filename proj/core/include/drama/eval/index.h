#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace drama::eval {

struct Hit {
  std::string id;
  double score = 0.0;

  friend bool operator==(const Hit&, const Hit&) = default;
};

/// Brute-force cosine index. Rows are unit-normalized at build time and kept
/// sorted by id; the index is immutable afterwards, so concurrent searches
/// are safe.
class ExactIndex {
 public:
  ExactIndex() = default;

  /// Throws DataError naming a duplicate id, on a zero (or non-finite)
  /// vector, and on inconsistent dimensions.
  static ExactIndex build(std::vector<std::pair<std::string, std::vector<double>>> pairs);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> row(std::size_t i) const { return {rows_.data() + i * dim_, dim_}; }

  /// Exact top-k by cosine, descending, ties by ascending id. The query is
  /// normalized here; k must lie in [1, size()].
  std::vector<Hit> search_topk(std::span<const double> query, std::size_t k) const;

  /// Little-endian: magic "DRAMAIDX", u32 version, u64 count, u64 dim, then
  /// per row a u32-length-prefixed id and dim f64 values.
  void save(const std::filesystem::path& path) const;
  static ExactIndex load(const std::filesystem::path& path);

  friend bool operator==(const ExactIndex&, const ExactIndex&) = default;

 private:
  std::vector<std::string> ids_;
  std::vector<double> rows_;
  std::size_t dim_ = 0;
};

}  // namespace drama::eval
