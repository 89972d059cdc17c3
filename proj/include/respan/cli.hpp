#pragma once

namespace respan {

// Entry point behind the `respan` executable; also callable from tests.
// Returns 0 on success, 1 on runtime failure, 2 on usage errors.
int run_cli(int argc, const char* const* argv);

} // namespace respan
