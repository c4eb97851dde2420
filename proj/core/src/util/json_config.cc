#include "drama/util/json_config.h"

#include <algorithm>

namespace drama {

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
  if (!obj.is_object()) throw ConfigError(std::string(context) + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ConfigError("unknown config key '" + std::string(context) + "." + it.key() + "'");
    }
  }
}

}  // namespace drama
