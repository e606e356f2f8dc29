#pragma once

#include <ostream>

namespace qspec::cli {

/// Runs one qspec command. Returns 0 on success, 1 on compute errors and 2 on
/// input errors; errors are written to `err` as JSON.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qspec::cli
