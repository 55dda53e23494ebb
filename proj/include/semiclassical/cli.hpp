#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semiclassical/config.hpp"

namespace semiclassical {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitParse = 2,
  kExitValidation = 3,
  kExitNumerical = 4,
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string error;                        // empty on success
  std::vector<std::filesystem::path> files; // artifacts written, manifest last
};

// Validates `config` for `command`, runs it and writes artifacts plus manifest.json into
// out_dir. Never throws for configuration or numerical failures; they map to exit codes.
RunOutcome run_command(Command command, const ScenarioConfig& config,
                       const std::filesystem::path& out_dir);

// Resolves a preset name to a file: a path is used as given, otherwise
// <dir>/<name>.cfg where dir is $SEMICLASSICAL_PRESET_DIR or the installed preset directory.
std::filesystem::path preset_path(const std::string& name);

// Entry point of the `semiclassical` executable.
int cli_main(int argc, char** argv);

}  // namespace semiclassical
