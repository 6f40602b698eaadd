#pragma once

#include <string>
#include <vector>

namespace hierpose::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Runs one subcommand of {synth, encode, decode, eval, bench, gradcheck,
/// overlay}. Returns 0 on success, 1 on validation failure, 2 on I/O failure.
/// Every written artifact is accompanied by a <artifact>.manifest.json whose
/// config block can be fed back through --config to reproduce the run.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace hierpose::cli
