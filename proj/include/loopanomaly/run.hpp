#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "loopanomaly/conformal_field.hpp"
#include "loopanomaly/loop_space.hpp"

namespace la {

// Invalid configuration (exit code 2 at the CLI).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment configuration.  A declarative JSON file carries the same
// fields; command-line flags override file values.  A fixed seed makes
// every numeric output byte-identical across runs and worker counts.
struct RunConfig {
    std::string experiment; // estimate-b | anomaly | sweep | bruteforce |
                            // spectral | subdivision | occupation
    nlohmann::json field = {{"kind", "zero"}};
    nlohmann::json measure = {{"kind", "brownian"}};
    std::vector<double> deltas = {0.04, 0.02, 0.01};
    std::int64_t N = 100000;
    int n = 1024; // loop resolution
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out = "out";
    double domain_margin = 0.75; // sampling window beyond the field support

    // spectral experiment
    double L1 = 1.0, L2 = 1.0;
    double C = 50.0;

    // bruteforce experiment
    double t_max = 16.0;

    // occupation experiment
    double occ_t = 4.0, occ_s = 1.0;

    // subdivision experiment
    int cells = 1;
    std::vector<double> targets = {1.0};
    int nodes_per_cell = 64;

    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    bool operator==(const RunConfig&) const = default;
};

RunConfig load_config_file(const std::string& path);

FieldPtr make_field(const nlohmann::json& j);
MeasureSpec make_measure(const nlohmann::json& j);

// Sampling window: field support grown by the margin.
Box anomaly_domain(const ConformalField& field, double margin);

// Executes the experiment and writes report.csv, report.json, summary.txt,
// plots/*.png and meta.json under config.out.  Throws ConfigError for bad
// configuration; numerical failures propagate as std::runtime_error.
void run_experiment(const RunConfig& config);

} // namespace la
