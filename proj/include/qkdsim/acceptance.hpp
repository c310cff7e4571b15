#pragma once

#include <ostream>

namespace qkd {

// Full acceptance suite; prints one pass/fail line per criterion and returns
// the number of failures.
int run_acceptance(std::ostream& out);

}  // namespace qkd
