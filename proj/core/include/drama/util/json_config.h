#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include "drama/util/error.h"
#include "drama/util/io.h"

namespace drama {

/// Rejects any key of `obj` not in `allowed`, naming the offending key with
/// its dotted `context` path.
void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

/// Reads `obj[key]` into `out` if present. Type mismatches raise ConfigError.
template <class T>
void read_opt(const Json& obj, const char* key, T& out, std::string_view context) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(context) + "." + key + ": " + e.what());
  }
}

}  // namespace drama
