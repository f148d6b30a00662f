#include <CLI11.hpp>

#include "oslab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"oslab: open-system scattering experiments"};
    app.require_subcommand(0);

    oslab::run::RunOptions opts;
    app.add_option("kind", opts.kind,
                   "experiment kind: geometry-check, orbit, trapped-set, quantize, gap-scan, "
                   "resolvent-scan, spectrum, wave, contour-test")
        ->required();
    app.add_option("--config", opts.configPath, "configuration file")->required();
    app.add_flag("--plot", opts.plot, "also write SVG plots");
    app.add_flag("--serial", opts.serial, "single worker, bit-exact outputs");
    app.add_option("--workers", opts.workers, "worker count (default: available cores)");
    app.add_option("--out", opts.outDirOverride, "output directory (beats OSLAB_OUT and config)");

    CLI11_PARSE(app, argc, argv);
    return oslab::run::run_cli(opts);
}
