#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace napavq::io {

/// Environment variable that relocates relative output paths.
inline constexpr const char* kOutputRootEnv = "NAPAVQ_OUTPUT_ROOT";

/// Runs one subcommand (train, ablate, sweep-k, gen-data, export-graph,
/// export-embeddings, report). `args` excludes the program name.
/// Returns 0 on success, 1 on runtime failure, 2 on usage errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace napavq::io
