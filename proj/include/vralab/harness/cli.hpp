#pragma once

// Command-line front end. Subcommands: run, sweep, portrait, probe,
// presets. Exit codes: 0 success, 1 configuration or usage error, 2 the
// work completed but diverged, 3 I/O failure.

namespace vralab::harness {

int cli_main(int argc, const char* const* argv);

}  // namespace vralab::harness
