#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loopanomaly/run.hpp"

// loopanomaly <experiment> --config <path> [--seed S] [--delta ...] [--n ...]
//             [--N ...] [--workers W] [--out DIR]
// exit codes: 0 success, 2 config error, 3 numerical error

int main(int argc, char** argv) {
    CLI::App app{"Brownian loop measure and conformal anomaly experiments"};
    app.failure_message(CLI::FailureMessage::help);

    std::string experiment;
    std::string config_path;
    std::vector<double> deltas;
    std::int64_t N = -1;
    int n = -1;
    int workers = -1;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("experiment", experiment,
                   "estimate-b | anomaly | sweep | bruteforce | spectral | subdivision | occupation")
        ->required();
    app.add_option("--config", config_path, "declarative JSON config file");
    app.add_option("--seed", seed, "64-bit seed")->each([&](const std::string&) { seed_set = true; });
    app.add_option("--delta", deltas, "cutoff list, descending");
    app.add_option("--n", n, "loop resolution");
    app.add_option("--N", N, "sample count");
    app.add_option("--workers", workers, "worker count");
    app.add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        la::RunConfig config;
        if (!config_path.empty()) config = la::load_config_file(config_path);
        config.experiment = experiment;
        if (seed_set) config.seed = seed;
        if (!deltas.empty()) config.deltas = deltas;
        if (n > 0) config.n = n;
        if (N > 0) config.N = N;
        if (workers > 0) config.workers = workers;
        if (!out.empty()) config.out = out;

        la::run_experiment(config);
        std::printf("wrote %s/{report.csv,report.json,summary.txt,meta.json}\n",
                    config.out.c_str());
        return 0;
    } catch (const la::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    }
}
