#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "loopanomaly/run.hpp"

using namespace la;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig tiny_sweep_config(const std::string& out, int workers) {
    RunConfig c;
    c.experiment = "sweep";
    c.field = {{"kind", "bump"}, {"profile", "smooth3"}, {"amplitude", 0.5}, {"radius", 1.0}};
    c.measure = {{"kind", "brownian"}};
    c.deltas = {0.05, 0.03};
    c.N = 3000;
    c.n = 64;
    c.seed = 12345;
    c.workers = workers;
    c.out = out;
    return c;
}

} // namespace

TEST_CASE("config round trip") {
    RunConfig c = tiny_sweep_config("x", 2);
    c.targets = {1.0, 0.0, -2.0, 0.5};
    c.cells = 2;
    const RunConfig back = RunConfig::from_json(c.to_json());
    CHECK(back == c);
}

TEST_CASE("config validation errors") {
    RunConfig c = tiny_sweep_config("/tmp/la_cfg_err", 1);
    c.experiment = "nonsense";
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c = tiny_sweep_config("/tmp/la_cfg_err", 1);
    c.deltas = {0.1, -0.2};
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    c = tiny_sweep_config("/tmp/la_cfg_err", 1);
    c.N = 10;
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
    CHECK_THROWS_AS((void)make_field({{"kind", "martian"}}), ConfigError);
    CHECK_THROWS_AS((void)make_measure({{"kind", "martian"}}), ConfigError);
}

TEST_CASE("reports are byte-identical across worker counts") {
    const fs::path a = "/tmp/la_run_w1", b = "/tmp/la_run_w3";
    fs::remove_all(a);
    fs::remove_all(b);
    run_experiment(tiny_sweep_config(a.string(), 1));
    run_experiment(tiny_sweep_config(b.string(), 3));
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
    CHECK(slurp(a / "summary.txt") == slurp(b / "summary.txt"));

    // report.json differs only through the echoed worker count, which lives
    // in meta.json; the report itself must match
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));

    CHECK(fs::exists(a / "plots/convergence.png"));
    CHECK(fs::exists(a / "meta.json"));
}

TEST_CASE("estimate-b experiment writes a sane report") {
    const fs::path out = "/tmp/la_run_b";
    fs::remove_all(out);
    RunConfig c;
    c.experiment = "estimate-b";
    c.measure = {{"kind", "brownian"}};
    c.N = 2000;
    c.n = 128;
    c.seed = 7;
    c.out = out.string();
    run_experiment(c);
    const std::string csv = slurp(out / "report.csv");
    CHECK(csv.find("field_id,measure,estimator,delta,n,value,std_error,fallback_rate,seed") !=
          std::string::npos);
    const std::string summary = slurp(out / "summary.txt");
    CHECK(summary.find("b = 0.083") != std::string::npos);
}

TEST_CASE("config file loading") {
    const fs::path p = "/tmp/la_cfg.json";
    {
        std::ofstream f(p);
        f << R"({"experiment":"estimate-b","measure":{"kind":"circle","radius":2.0},)"
          << R"("N":2500,"n":64,"seed":9,"out":"/tmp/la_cfg_out"})";
    }
    const RunConfig c = load_config_file(p.string());
    CHECK(c.experiment == "estimate-b");
    CHECK(c.N == 2500);
    CHECK(make_measure(c.measure).radius == 2.0);
    CHECK_THROWS_AS((void)load_config_file("/tmp/does_not_exist.json"), ConfigError);
}
