#pragma once

namespace cexgen::cli {

// Parses argv and runs one subcommand. Returns the process exit status:
// 0 success, 1 item failures under --strict or a runtime error, 2 bad
// configuration or usage.
int run(int argc, char** argv);

}  // namespace cexgen::cli
