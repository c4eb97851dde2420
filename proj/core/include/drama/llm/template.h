#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace drama::llm {

/// A prompt template loaded from "<name>.v<version>.txt". Placeholders are
/// written {{var}}.
struct PromptTemplate {
  std::string name;
  int version = 0;
  std::string text;
  /// SHA-256 of the file bytes.
  std::string sha256;

  std::string id() const { return name + ".v" + std::to_string(version); }
  /// Substitutes every {{var}}; an unknown or unfilled placeholder raises
  /// ConfigError.
  std::string render(const std::map<std::string, std::string>& vars) const;
};

/// All templates of one directory, highest version per name.
class TemplateSet {
 public:
  static TemplateSet load(const std::filesystem::path& dir);
  /// The DRAMA_TEMPLATE_DIR environment variable, else the source tree's
  /// core/assets/templates.
  static std::filesystem::path default_dir();

  const PromptTemplate& get(const std::string& name) const;
  const std::map<std::string, PromptTemplate>& all() const { return by_name_; }

 private:
  std::map<std::string, PromptTemplate> by_name_;
};

}  // namespace drama::llm
