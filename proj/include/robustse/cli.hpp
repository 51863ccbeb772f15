#pragma once

#include <ostream>

namespace robustse::cli {

/// Exit codes: 0 success, 1 usage or input error, 2 estimator failure under --strict.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace robustse::cli
