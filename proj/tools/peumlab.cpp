// peumlab <command> --config <path> [--out <dir>] [--threads <n>] [--seed <u64>] [--timestamp]

#include <CLI11.hpp>

#include "peum/cli_io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for piecewise expanding unimodal map families"};
    app.require_subcommand(1);

    std::string config;
    std::string out = ".";
    int threads = 0;
    std::uint64_t seed = 0;
    bool timestamp = false;

    const std::pair<const char*, const char*> commands[] = {
        {"density", "stationary density on the Ulam grid"},
        {"sweep", "Gamma(t) over a parameter grid"},
        {"j", "transversality series over a parameter grid"},
        {"sigma", "Green-Kubo diffusion coefficient, CLT and LIL traces"},
        {"shadow", "non-shadowable sets, return times and overlaps"},
        {"modulus", "modulus-of-continuity scan and decomposition audit"},
        {"recurrence", "critical-orbit recurrence and assumption diagnostics"},
    };
    std::vector<CLI::App*> subs;
    std::vector<CLI::Option*> seed_opts;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--threads", threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
        seed_opts.push_back(sub->add_option("--seed", seed, "overrides the config seed"));
        sub->add_flag("--timestamp", timestamp, "record wall times and a timestamp in outputs");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : peum::cli::kConfigError;
    }

    peum::cli::RunOptions opt;
    opt.out = out;
    opt.threads = threads;
    opt.timestamp = timestamp;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        if (seed_opts[i]->count() > 0) opt.seed = seed;
        return peum::cli::run_from_file(subs[i]->get_name(), config, opt);
    }
    return peum::cli::kConfigError;
}
