#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace foldplan {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a domain error (message on `err`) and 2 on a usage error
/// (synopsis on `err`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace foldplan
