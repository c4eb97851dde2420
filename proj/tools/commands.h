#pragma once

#include <string>
#include <vector>

#include "run_config.h"

namespace drama::cli {

struct CommandArgs {
  std::string mode;  // augment
};

/// What a command read and wrote, for the manifest.
struct Artifacts {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  /// Written but excluded from determinism checks (wall-clock timings).
  std::vector<std::string> sidecars;
  Json templates = Json::object();
  Json details = Json::object();
  int exit_code = 0;
};

const std::vector<std::string>& command_names();
std::string command_help(const std::string& name);

Artifacts run_command(const std::string& name, const RunConfig& rc, const CommandArgs& args);

/// Manifest target: paths.manifest, else beside the primary output.
std::string manifest_path(const std::string& command, const RunConfig& rc);

Json build_manifest(const std::string& command, const CommandArgs& args, const RunConfig& rc, const Artifacts& a);

}  // namespace drama::cli
