#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kenn::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailure = 1;
inline constexpr int kRuntimeError = 2;
inline constexpr int kCheckFailed = 3;

/// Runs one `kenn` invocation. Machine-readable output (JSON lines, clause
/// files, tables the user asked for) goes to `out`; diagnostics and human
/// summaries go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kenn::cli
