// Command-line entry point: ingest / fit / simulate / evaluate / bet.
#pragma once

namespace matchup {

// Exit codes: 0 success, 1 domain or validation failure, 2 usage or IO
// failure.
int run_cli(int argc, const char* const* argv);

}  // namespace matchup
