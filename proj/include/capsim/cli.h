#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace capsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `capsim` tool: validate, sample, run, compare, serve.
/// Diagnostics go to `err`, summaries to `out`.
int cli_run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace capsim
