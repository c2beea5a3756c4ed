#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "wonham/errors.hpp"

namespace wonham {

// Exit-code contract of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitTolerance = 4,
};

// Input and validation problems map to 2, failures during computation to 3.
int exit_code_for(ErrorCode code);

struct CommandOptions {
  std::string out_dir;      // empty: $WONHAM_OUT_DIR, else "wonham_out"
  std::size_t workers = 0;  // 0: default_workers()
};

int cmd_analyze(const std::string& model_path, const CommandOptions& options, std::ostream& out);

int cmd_divergence(const std::string& config_path, const CommandOptions& options, bool write_svg, std::ostream& out);

// Exit 4 when a bundled check fails.
int cmd_backward(const std::string& config_path, const CommandOptions& options, std::ostream& out);

struct Table1Command {
  std::uint64_t seed = 1;
  bool quick = false;                   // n_paths = 100 and widened tolerances
  std::optional<std::size_t> n_paths;   // overrides the default (or quick) path count
};

// Prints the table and tolerance checks; exit 4 naming the first failing row.
int cmd_reproduce_table1(const Table1Command& command, const CommandOptions& options, std::ostream& out,
                         std::ostream& err);

}  // namespace wonham
