#pragma once

#include <iosfwd>

namespace gevmq {

// Entry point of the gevmq tool. Exit codes: 0 success, 1 estimation
// failure, 2 usage or domain error. Errors go to err as a JSON object.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gevmq
