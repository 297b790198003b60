#include "loopanomaly/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "loopanomaly/loop_mass.hpp"
#include "loopanomaly/plot.hpp"
#include "loopanomaly/special.hpp"
#include "loopanomaly/spectral.hpp"
#include "loopanomaly/subdivision.hpp"

namespace la {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    try {
        c.experiment = j.at("experiment").get<std::string>();
        if (j.contains("field")) c.field = j.at("field");
        if (j.contains("measure")) c.measure = j.at("measure");
        if (j.contains("deltas")) c.deltas = j.at("deltas").get<std::vector<double>>();
        if (j.contains("N")) c.N = j.at("N").get<std::int64_t>();
        if (j.contains("n")) c.n = j.at("n").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("workers")) c.workers = j.at("workers").get<int>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        if (j.contains("domain_margin")) c.domain_margin = j.at("domain_margin").get<double>();
        if (j.contains("L1")) c.L1 = j.at("L1").get<double>();
        if (j.contains("L2")) c.L2 = j.at("L2").get<double>();
        if (j.contains("C")) c.C = j.at("C").get<double>();
        if (j.contains("t_max")) c.t_max = j.at("t_max").get<double>();
        if (j.contains("occ_t")) c.occ_t = j.at("occ_t").get<double>();
        if (j.contains("occ_s")) c.occ_s = j.at("occ_s").get<double>();
        if (j.contains("cells")) c.cells = j.at("cells").get<int>();
        if (j.contains("targets")) c.targets = j.at("targets").get<std::vector<double>>();
        if (j.contains("nodes_per_cell")) c.nodes_per_cell = j.at("nodes_per_cell").get<int>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

json RunConfig::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["field"] = field;
    j["measure"] = measure;
    j["deltas"] = deltas;
    j["N"] = N;
    j["n"] = n;
    j["seed"] = seed;
    j["workers"] = workers;
    j["out"] = out;
    j["domain_margin"] = domain_margin;
    j["L1"] = L1;
    j["L2"] = L2;
    j["C"] = C;
    j["t_max"] = t_max;
    j["occ_t"] = occ_t;
    j["occ_s"] = occ_s;
    j["cells"] = cells;
    j["targets"] = targets;
    j["nodes_per_cell"] = nodes_per_cell;
    return j;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse failure in ") + path + ": " + e.what());
    }
    return RunConfig::from_json(j);
}

FieldPtr make_field(const json& j) {
    std::string kind;
    try {
        kind = j.at("kind").get<std::string>();
        auto get_or = [&](const char* key, double dflt) {
            return j.contains(key) ? j.at(key).get<double>() : dflt;
        };
        if (kind == "zero") {
            return std::make_shared<BumpField>(Vec2{0, 0}, 1.0, 0.0, BumpField::Profile::smooth3);
        }
        if (kind == "bump" || kind == "analytic_bump") {
            const std::string profile =
                j.contains("profile") ? j.at("profile").get<std::string>() : "smooth3";
            BumpField::Profile prof = BumpField::Profile::smooth3;
            if (profile == "cone2") prof = BumpField::Profile::cone2;
            if (profile == "mollifier") prof = BumpField::Profile::mollifier;
            return std::make_shared<BumpField>(Vec2{get_or("cx", 0.0), get_or("cy", 0.0)},
                                               get_or("radius", 1.0), get_or("amplitude", 0.5),
                                               prof);
        }
        if (kind == "tapered_sine") {
            const double side = get_or("side", kTwoPi);
            return std::make_shared<TaperedSineField>(
                j.contains("j") ? j.at("j").get<int>() : 4, Box{0, 0, side, side},
                get_or("amplitude", 1.0), j.contains("tapered") ? j.at("tapered").get<bool>() : true);
        }
        if (kind == "cosine") {
            return std::make_shared<CosineProductField>(
                get_or("amplitude", 0.25), j.contains("kx") ? j.at("kx").get<int>() : 1,
                j.contains("ky") ? j.at("ky").get<int>() : 1, get_or("L1", 1.0), get_or("L2", 1.0));
        }
        if (kind == "linear") {
            const double side = get_or("side", 4.0);
            return std::make_shared<LinearField>(get_or("kappa", 0.1),
                                                 Box{-side / 2, -side / 2, side / 2, side / 2});
        }
        if (kind == "grid") {
            const std::string path = j.at("path").get<std::string>();
            if (!fs::exists(path)) throw ConfigError("config: grid field file not found: " + path);
            return std::make_shared<GridField>(read_grid_field_file(path));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config.field: ") + e.what());
    }
    throw ConfigError("config.field: unknown kind '" + kind + "'");
}

MeasureSpec make_measure(const json& j) {
    try {
        const std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "brownian";
        MeasureSpec m;
        if (kind == "brownian" || kind == "brownian_bridge")
            m = MeasureSpec::brownian();
        else if (kind == "circle")
            m = MeasureSpec::circle(j.contains("radius") ? j.at("radius").get<double>() : 1.0);
        else if (kind == "square")
            m = MeasureSpec::square(j.contains("half_width") ? j.at("half_width").get<double>()
                                                             : 1.0);
        else
            throw ConfigError("config.measure: unknown kind '" + kind + "'");
        if (j.contains("normalization")) m.normalization = j.at("normalization").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config.measure: ") + e.what());
    }
}

Box anomaly_domain(const ConformalField& field, double margin) {
    const Box s = field.support();
    return {s.x0 - margin, s.y0 - margin, s.x1 + margin, s.y1 + margin};
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct ReportWriter {
    std::string csv = "field_id,measure,estimator,delta,n,value,std_error,fallback_rate,seed\n";
    json rows = json::array();
    std::string summary;

    void add_row(const std::string& field_id, const std::string& measure,
                 const std::string& estimator, double delta, std::int64_t n, double value,
                 double std_error, double fallback_rate, std::uint64_t seed) {
        csv += field_id + "," + measure + "," + estimator + "," + fmt(delta) + "," +
               std::to_string(n) + "," + fmt(value) + "," + fmt(std_error) + "," +
               fmt(fallback_rate) + "," + std::to_string(seed) + "\n";
        json r;
        r["field_id"] = field_id;
        r["measure"] = measure;
        r["estimator"] = estimator;
        r["delta"] = delta;
        r["n"] = n;
        r["value"] = value;
        r["std_error"] = std_error;
        r["fallback_rate"] = fallback_rate;
        r["seed"] = seed;
        rows.push_back(r);
    }

    void add_estimate(const AnomalyEstimate& e) {
        add_row(e.field_id, e.measure, estimator_name(e.estimator), e.delta, e.n_samples, e.value,
                e.std_error, e.fallback_rate, e.seed);
    }

    void note(const std::string& line) { summary += line + "\n"; }
};

void write_reports(const RunConfig& config, ReportWriter& rep, const json& extra,
                   const std::vector<PlotSeries>& series, const PlotOptions& plot_options,
                   double wall_seconds) {
    const fs::path out(config.out);
    fs::create_directories(out);
    fs::create_directories(out / "plots");

    std::ofstream(out / "report.csv") << rep.csv;

    json report;
    report["experiment"] = config.experiment;
    report["rows"] = rep.rows;
    if (!extra.is_null()) report["extra"] = extra;
    std::ofstream(out / "report.json") << report.dump(2) << "\n";

    std::ofstream(out / "summary.txt") << rep.summary;

    if (!series.empty())
        write_plot_png((out / "plots" / "convergence.png").string(), series, plot_options);

    json meta;
    meta["wall_seconds"] = wall_seconds;
    meta["workers"] = config.workers;
    meta["compiler"] = __VERSION__;
    meta["config"] = config.to_json();
    std::ofstream(out / "meta.json") << meta.dump(2) << "\n";
}

double predicted_b(const MeasureSpec& m) {
    switch (m.kind) {
        case SamplerKind::brownian_bridge: return 1.0 / 12.0;
        case SamplerKind::circle: return 0.5 * m.radius * m.radius;
        case SamplerKind::square: return 2.0 / 3.0 * m.half_width * m.half_width;
    }
    return 0.0;
}

void run_estimate_b(const RunConfig& config, ReportWriter& rep, json& extra) {
    const MeasureSpec measure = make_measure(config.measure);
    const MomentEstimate est =
        occupation_moment_b(measure, config.n, config.N, Rng(config.seed), config.workers);
    rep.add_row("-", measure.name(), "b", 0.0, est.n_samples, est.value, est.std_error, 0.0,
                config.seed);
    char line[160];
    std::snprintf(line, sizeof line, "b = %.6f +/- %.2g  (prediction %.6f)", est.value,
                  est.std_error, predicted_b(measure));
    rep.note(line);
    extra["b"] = est.value;
    extra["b_std_error"] = est.std_error;
    extra["b_prediction"] = predicted_b(measure);
}

void run_anomaly(const RunConfig& config, ReportWriter& rep, json& extra,
                 std::vector<PlotSeries>& series) {
    const FieldPtr field = make_field(config.field);
    const MeasureSpec measure = make_measure(config.measure);
    const Box D = anomaly_domain(*field, config.domain_margin);
    const double energy = dirichlet_energy(*field);
    const double predicted = measure.normalization * 0.5 * predicted_b(measure) * energy;

    DirectOptions opt;
    opt.loop_resolution = config.n;
    opt.workers = config.workers;

    PlotSeries direct_series{"direct", {}, {}, {}};
    PlotSeries disc_series{"discrepancy", {}, {}, {}};
    for (double delta : config.deltas) {
        const AnomalyEstimate direct = estimate_anomaly_direct(*field, D, delta, measure,
                                                               config.N, Rng(config.seed), opt);
        const AnomalyEstimate disc =
            estimate_discrepancy(*field, D, delta, measure, config.N, Rng(config.seed),
                                 DiscrepancyWeighting::uniform_center, config.n, config.workers);
        rep.add_estimate(direct);
        rep.add_estimate(disc);
        direct_series.x.push_back(delta);
        direct_series.y.push_back(direct.value);
        direct_series.yerr.push_back(direct.std_error);
        disc_series.x.push_back(delta);
        disc_series.y.push_back(disc.value);
        disc_series.yerr.push_back(disc.std_error);
        char line[200];
        std::snprintf(line, sizeof line,
                      "delta=%.4g  direct=%.6g +/- %.2g  discrepancy=%.6g +/- %.2g  fallback=%.2g",
                      delta, direct.value, direct.std_error, disc.value, disc.std_error,
                      direct.fallback_rate);
        rep.note(line);
    }
    char line[160];
    std::snprintf(line, sizeof line, "predicted (b/2)(rho,rho)_grad * normalization = %.6g",
                  predicted);
    rep.note(line);
    extra["dirichlet_energy"] = energy;
    extra["predicted_anomaly"] = predicted;
    series.push_back(direct_series);
    series.push_back(disc_series);
    series.push_back(PlotSeries{"=prediction", {config.deltas.front()}, {predicted}, {}});
}

void run_bruteforce(const RunConfig& config, ReportWriter& rep, json& extra) {
    const FieldPtr field = make_field(config.field);
    const MeasureSpec measure = make_measure(config.measure);
    const Box D = anomaly_domain(*field, config.domain_margin);
    const double delta = config.deltas.front();
    const MassEstimate mass = mass_direct_bruteforce(*field, D, delta, measure, config.N,
                                                     config.t_max, Rng(config.seed), config.n, 64,
                                                     config.workers);
    const double clen = clen_mass_exact(*field, D, delta, measure);
    rep.add_row(field->describe(), measure.name(), "bruteforce", delta, mass.n_samples, mass.value,
                mass.std_error, 0.0, config.seed);
    rep.add_row(field->describe(), measure.name(), "clen_exact", delta, 0, clen, 0.0, 0.0,
                config.seed);
    char line[200];
    std::snprintf(line, sizeof line,
                  "mass(len_rho >= %.4g) = %.6f +/- %.2g   clen mass = %.6f   defect = %.6g",
                  delta, mass.value, mass.std_error, clen, mass.value - clen);
    rep.note(line);
    extra["mass"] = mass.value;
    extra["mass_std_error"] = mass.std_error;
    extra["clen_mass_exact"] = clen;
    extra["defect"] = mass.value - clen;
}

void run_sweep(const RunConfig& config, ReportWriter& rep, json& extra,
               std::vector<PlotSeries>& series) {
    const FieldPtr field = make_field(config.field);
    const MeasureSpec measure = make_measure(config.measure);
    const Box D = anomaly_domain(*field, config.domain_margin);
    const double energy = dirichlet_energy(*field);
    const double predicted = measure.normalization * 0.5 * predicted_b(measure) * energy;

    DirectOptions opt;
    opt.loop_resolution = config.n;
    opt.workers = config.workers;
    const auto sweep = delta_sweep(*field, D, config.deltas, measure, config.N, Rng(config.seed), opt);

    PlotSeries s{"direct", {}, {}, {}};
    rep.note("delta        value          std_error      |value - prediction|");
    for (const auto& est : sweep) {
        rep.add_estimate(est);
        s.x.push_back(est.delta);
        s.y.push_back(est.value);
        s.yerr.push_back(est.std_error);
        char line[200];
        std::snprintf(line, sizeof line, "%-12.5g %-14.8g %-14.3g %-14.8g", est.delta, est.value,
                      est.std_error, std::abs(est.value - predicted));
        rep.note(line);
    }
    char line[160];
    std::snprintf(line, sizeof line, "prediction (b/2)(rho,rho)_grad * normalization = %.8g",
                  predicted);
    rep.note(line);
    extra["dirichlet_energy"] = energy;
    extra["predicted_anomaly"] = predicted;
    series.push_back(s);
    series.push_back(PlotSeries{"=prediction", {config.deltas.front()}, {predicted}, {}});
}

void run_spectral(const RunConfig& config, ReportWriter& rep, json& extra) {
    const TorusSpec spec{config.L1, config.L2};
    const FieldPtr field = make_field(config.field);
    const double delta = config.deltas.front();

    json spectral;
    spectral["periods"] = {spec.L1, spec.L2};
    const auto ev = torus_eigenvalues(spec, 8);
    spectral["eigenvalues_head"] = std::vector<double>(ev.begin(), ev.begin() + 16);

    json zgrid = json::array();
    rep.note("t        Z(t)           Weyl ratio Z*4pi*t/area");
    for (double t : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
        const double z = heat_trace(spec, t);
        const double ratio = z * 4.0 * kPi * t / spec.area();
        json row;
        row["t"] = t;
        row["Z"] = z;
        row["weyl_ratio"] = ratio;
        zgrid.push_back(row);
        char line[160];
        std::snprintf(line, sizeof line, "%-8.3g %-14.8g %-14.10g", t, z, ratio);
        rep.note(line);
    }
    spectral["heat_trace"] = zgrid;

    const double det = zeta_determinant(spec);
    spectral["det_zeta"] = det;
    char line[200];
    std::snprintf(line, sizeof line, "det'_zeta = %.12g", det);
    rep.note(line);

    const PaTerms terms = pa_rhs(spec, *field, delta, config.C);
    json jt;
    jt["vol_rho_over_2pi_delta"] = terms.vol_rho_over_2pi_delta;
    jt["log_C"] = terms.log_C;
    jt["euler_gamma"] = terms.euler_gamma;
    jt["dirichlet_over_48pi"] = terms.dirichlet_over_48pi;
    jt["log_vol"] = terms.log_vol;
    jt["minus_log_vol_rho"] = terms.minus_log_vol_rho;
    jt["minus_log_det"] = terms.minus_log_det;
    jt["total"] = terms.total();
    spectral["pa_rhs"] = jt;

    const TorusMassEstimate mass = torus_loop_mass(spec, *field, delta, config.C, config.N,
                                                   Rng(config.seed), config.n, config.workers);
    spectral["loop_mass"] = mass.value;
    spectral["loop_mass_std_error"] = mass.std_error;
    rep.add_row(field->describe(), "torus", "loop_mass", delta, mass.n_samples, mass.value,
                mass.std_error, 0.0, config.seed);
    std::snprintf(line, sizeof line,
                  "loop mass(delta=%.4g, C=%.4g) = %.6f +/- %.2g;  rhs total = %.6f;  diff = %.4g",
                  delta, config.C, mass.value, mass.std_error, terms.total(),
                  mass.value - terms.total());
    rep.note(line);
    std::snprintf(line, sizeof line, "diff + log 2 = %.4g  (time-convention offset check)",
                  mass.value - terms.total() + std::log(2.0));
    rep.note(line);
    extra = spectral;
}

void run_subdivision(const RunConfig& config, ReportWriter& rep, json& extra) {
    SquareSubdivisionSpec spec;
    spec.domain = {0.0, 0.0, 1.0, 1.0};
    spec.cells = config.cells;
    spec.targets = config.targets;
    spec.nodes_per_cell = config.nodes_per_cell;
    if (spec.targets.size() != static_cast<std::size_t>(spec.cells) * spec.cells)
        throw ConfigError("subdivision: targets must have cells*cells entries");
    const GridField field = build_square_subdivision(spec);

    const fs::path out(config.out);
    fs::create_directories(out);
    write_grid_field_file((out / "field.bin").string(), field);

    const StencilCheckResult check = stencil_check(field, spec, 8);
    const double mismatch = edge_gradient_mismatch(field, spec);
    char line[200];
    std::snprintf(line, sizeof line,
                  "stencil max error %.4g at spacing %.4g over %d nodes; edge C1 mismatch %.4g",
                  check.max_error, check.stencil_spacing, check.checked_nodes, mismatch);
    rep.note(line);
    rep.note("field written to field.bin");
    extra["stencil_max_error"] = check.max_error;
    extra["stencil_spacing"] = check.stencil_spacing;
    extra["edge_gradient_mismatch"] = mismatch;
    extra["dirichlet_energy"] = field.dirichlet_energy_exact();
}

void run_occupation(const RunConfig& config, ReportWriter& rep, json& extra) {
    const MeasureSpec measure = make_measure(config.measure);
    const MomentEstimate b =
        occupation_moment_b(measure, config.n, config.N, Rng(config.seed), config.workers);
    const int bins = std::max(4, static_cast<int>(std::sqrt(static_cast<double>(config.N) / 200.0)));
    const ScalingCheckResult check = occupation_scaling_check(
        measure, config.occ_t, config.occ_s, bins, config.N, Rng(config.seed ^ 0x5ca1ab1eULL));
    rep.add_row("-", measure.name(), "b", 0.0, b.n_samples, b.value, b.std_error, 0.0, config.seed);
    char line[240];
    std::snprintf(line, sizeof line,
                  "b = %.6f +/- %.2g;  scaling check (t=%g, s=%g): sup |dev| = %.4g, sup sigma = "
                  "%.3g, frac>3se = %.3g",
                  b.value, b.std_error, config.occ_t, config.occ_s, check.max_abs_deviation,
                  check.max_sigma_deviation, check.frac_bins_over_3se);
    rep.note(line);
    extra["b"] = b.value;
    extra["scaling_max_abs_deviation"] = check.max_abs_deviation;
    extra["scaling_max_sigma"] = check.max_sigma_deviation;
}

} // namespace

void run_experiment(const RunConfig& config) {
    for (double d : config.deltas)
        if (d <= 0.0) throw ConfigError("config: deltas must be positive");
    if (config.deltas.empty()) throw ConfigError("config: need at least one delta");
    if (config.N < 1000) throw ConfigError("config: N must be >= 1000");
    if (config.n < 4) throw ConfigError("config: loop resolution n must be >= 4");
    if (config.workers < 1) throw ConfigError("config: workers must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    ReportWriter rep;
    json extra;
    std::vector<PlotSeries> series;
    PlotOptions plot_options;
    plot_options.x_label = "delta";
    plot_options.y_label = "anomaly";
    plot_options.log_x = true;

    if (config.experiment == "estimate-b")
        run_estimate_b(config, rep, extra);
    else if (config.experiment == "anomaly")
        run_anomaly(config, rep, extra, series);
    else if (config.experiment == "sweep")
        run_sweep(config, rep, extra, series);
    else if (config.experiment == "bruteforce")
        run_bruteforce(config, rep, extra);
    else if (config.experiment == "spectral")
        run_spectral(config, rep, extra);
    else if (config.experiment == "subdivision")
        run_subdivision(config, rep, extra);
    else if (config.experiment == "occupation")
        run_occupation(config, rep, extra);
    else
        throw ConfigError("config: unknown experiment '" + config.experiment + "'");

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_reports(config, rep, extra, series, plot_options, wall);
}

} // namespace la
