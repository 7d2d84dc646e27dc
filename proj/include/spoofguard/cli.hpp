#pragma once

namespace spoofguard::cli {

/// Entry point of the spoofguard binary. Returns 0 on success, 1 on usage or
/// validation errors and 2 on I/O or file format errors; diagnostics go to
/// standard error as a single line.
int run(int argc, char** argv);

}  // namespace spoofguard::cli
