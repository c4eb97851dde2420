#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace drama {

using Json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);

/// Writes atomically-enough for our purposes: truncates, never appends.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Reads one JSON object per nonblank line. Parse errors raise DataError
/// with the 1-based line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t line)>& fn);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

/// Compact single-line dump with sorted keys (nlohmann's object_t is an
/// ordered std::map), so identical values serialize to identical bytes.
std::string canonical_dump(const Json& j);

}  // namespace drama
