#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semimart/cli/config.hpp"

namespace semimart::cli {

enum class OutputFormat { json, csv, both };

struct RunOptions {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> out_dir;
  int workers = 0;  // 0: one per hardware thread
  OutputFormat format = OutputFormat::both;
};

struct RunResult {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> warnings;
};

const std::vector<std::string>& command_names();

// Loads the config, runs the command and writes <out>/<command>.{json,csv}.
// Every failure surfaces as CliError carrying its exit code.
RunResult run(const RunOptions& options);

}  // namespace semimart::cli
