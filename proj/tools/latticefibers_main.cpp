#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "latticefibers/experiment.hpp"

namespace {

struct CliArgs {
    std::string config;
    int jobs = 1;
    bool stable_output = false;
    std::string out_dir;
};

void add_mode(CLI::App& app, const std::string& mode, const std::string& desc, CliArgs& args,
              std::string& selected) {
    CLI::App* sub = app.add_subcommand(mode, desc);
    sub->add_option("--config", args.config, "experiment config (JSON)")->required();
    sub->add_option("--jobs", args.jobs, "worker threads");
    sub->add_flag("--stable-output", args.stable_output, "omit timings for byte-identical reports");
    sub->add_option("--out", args.out_dir, "output directory (overrides config)");
    sub->callback([&selected, mode] { selected = mode; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latticefibers: spectra and dichotomy verdicts for two-particle lattice fiber Hamiltonians"};
    app.require_subcommand(1);

    CliArgs args;
    std::string selected;
    add_mode(app, "band", "band edges and A(k) over a k set", args, selected);
    add_mode(app, "spectrum", "full truncated spectrum with band classification", args, selected);
    add_mode(app, "scan", "k-grid scan of discrete-eigenvalue counts", args, selected);
    add_mode(app, "dichotomy", "finite/infinite discrete-spectrum verdicts", args, selected);
    add_mode(app, "bs-count", "Birman-Schwinger eigenvalue counts", args, selected);
    add_mode(app, "convergence", "counts vs box radius study", args, selected);
    CLI11_PARSE(app, argc, argv);

    try {
        latfib::ExperimentConfig cfg = latfib::ExperimentConfig::load(args.config);
        if (cfg.mode != selected) {
            std::fprintf(stderr, "error: config mode '%s' does not match subcommand '%s'\n",
                         cfg.mode.c_str(), selected.c_str());
            return 2;
        }
        latfib::RunOptions opt;
        opt.jobs = args.jobs;
        opt.stable_output = args.stable_output;
        if (!args.out_dir.empty()) opt.out_dir = args.out_dir;
        const auto report = latfib::run(cfg, opt);
        std::printf("wrote %s/report.json (%zu results)\n",
                    opt.out_dir.value_or(cfg.output_dir).c_str(), report["results"].size());
        for (const auto& w : report["warnings"]) {
            std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
