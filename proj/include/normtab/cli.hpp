#pragma once

namespace normtab {

/// Entry point behind the `normtab` binary. Returns 0 on success, 1 on
/// runtime failures, 2 on usage errors.
int run_cli(int argc, char** argv);

}  // namespace normtab
