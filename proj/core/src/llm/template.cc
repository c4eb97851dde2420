#include "drama/llm/template.h"

#include <cstdlib>
#include <regex>

#include "drama/util/error.h"
#include "drama/util/hash.h"
#include "drama/util/io.h"

namespace drama::llm {

std::string PromptTemplate::render(const std::map<std::string, std::string>& vars) const {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string::npos) break;
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string::npos) throw ConfigError("template " + id() + ": unterminated placeholder");
    const std::string key = text.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end()) throw ConfigError("template " + id() + ": no value for {{" + key + "}}");
    out.append(text, pos, open - pos);
    out += it->second;
    pos = close + 2;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

std::filesystem::path TemplateSet::default_dir() {
  if (const char* env = std::getenv("DRAMA_TEMPLATE_DIR"); env && *env) return env;
#ifdef DRAMA_TEMPLATE_DIR
  return DRAMA_TEMPLATE_DIR;
#else
  return "templates";
#endif
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
  static const std::regex kName(R"(([A-Za-z0-9_]+)\.v([0-9]+)\.txt)");
  TemplateSet set;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::smatch m;
    const std::string fname = f.filename().string();
    if (!std::regex_match(fname, m, kName)) continue;
    PromptTemplate t;
    t.name = m[1];
    t.version = std::stoi(m[2]);
    t.text = read_text_file(f);
    t.sha256 = sha256_hex(t.text);
    auto it = set.by_name_.find(t.name);
    if (it == set.by_name_.end() || it->second.version < t.version) set.by_name_[t.name] = std::move(t);
  }
  return set;
}

const PromptTemplate& TemplateSet::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ConfigError("no prompt template named '" + name + "'");
  return it->second;
}

}  // namespace drama::llm
