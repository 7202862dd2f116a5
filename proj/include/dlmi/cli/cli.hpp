#pragma once

#include <iosfwd>

namespace dlmi {

/// Subcommands: gen-data, build, insert, query, bench, optimize-ri, check.
/// Returns 0 on success, 1 on a runtime failure, 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dlmi
