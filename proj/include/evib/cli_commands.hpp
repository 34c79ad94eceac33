#pragma once

namespace evib {

/// Full command-line dispatch for the evib tool. Returns the process exit
/// code: 0 success, 2 usage error, 3 data error, 4 convergence failure.
int run_cli(int argc, char** argv);

}  // namespace evib
