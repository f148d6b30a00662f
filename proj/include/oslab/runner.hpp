#pragma once

#include <string>

#include "oslab/config.hpp"
#include "oslab/manifest.hpp"

namespace oslab::run {

struct RunOptions {
    std::string kind;           // positional CLI kind; empty = take it from the config
    std::string configPath;
    std::string outDirOverride; // --out, wins over OSLAB_OUT and the config
    int workers = 0;            // 0 = available cores
    bool serial = false;        // force single worker
    bool plot = false;          // also emit SVG plots
};

// Dispatch a parsed config to the named experiment. Writes all CSV/SVG
// outputs into the resolved output directory, then the manifest, atomically
// and last. Returns the manifest that was written.
RunManifest run_experiment(const Config& cfg, const RunOptions& opts);

// Full CLI path: load the config, run, map errors to exit codes
// (1 config, 2 numeric, 3 I/O) with a message on stderr.
int run_cli(const RunOptions& opts);

} // namespace oslab::run
