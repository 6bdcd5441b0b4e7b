#pragma once

#include <iosfwd>

namespace isac {

/// Output directory override, taking precedence over the config's output_dir.
inline constexpr const char* kOutputDirEnv = "ISAC_OUTPUT_DIR";

/**
 * Entry point of the isac_waveform tool.
 *
 *   design <config>                          sequence.csv filter.csv trace.csv caf.csv
 *   evaluate <config>                        report.csv
 *   sweep <config> --axis A --values v1,...  sweep.csv
 *
 * Exit status: 0 success, 1 invalid usage or config, 2 design stopped at
 * max_iters (artifacts written), 3 runtime failure.
 */
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace isac
