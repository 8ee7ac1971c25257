#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace meanfield::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitValidation = 4,
};

const std::vector<std::string>& subcommand_names();

/// Runs one subcommand, writes its CSVs and manifest.json under
/// cfg.output_dir and returns the exit code. Core errors propagate as
/// exceptions; map them with exit_code_for.
int run_subcommand(std::string_view name, const RunConfig& cfg, int threads, std::ostream& log);

/// Exit code for an exception escaping run_subcommand.
int exit_code_for(std::exception_ptr error);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace meanfield::app
