#include "loopanomaly/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "loopanomaly/length_functionals.hpp"
#include "loopanomaly/parallel.hpp"
#include "loopanomaly/special.hpp"
#include "loopanomaly/stats.hpp"

namespace la {

std::vector<double> torus_eigenvalues(const TorusSpec& spec, int m_max) {
    if (m_max < 1) throw std::invalid_argument("torus_eigenvalues: m_max must be >= 1");
    std::vector<double> ev;
    ev.reserve(static_cast<std::size_t>(2 * m_max + 1) * (2 * m_max + 1));
    const double c1 = 4.0 * kPi * kPi / (spec.L1 * spec.L1);
    const double c2 = 4.0 * kPi * kPi / (spec.L2 * spec.L2);
    for (int m = -m_max; m <= m_max; ++m)
        for (int n = -m_max; n <= m_max; ++n)
            ev.push_back(c1 * m * m + c2 * n * n);
    std::sort(ev.begin(), ev.end());
    return ev;
}

namespace {

// 1 + 2 sum_{m>=1} e^{-a m^2}
double theta_sum(double a) {
    double s = 1.0;
    for (int m = 1;; ++m) {
        const double term = 2.0 * std::exp(-a * m * m);
        s += term;
        if (term < 1e-18 * s) break;
    }
    return s;
}

// 2 sum_{m>=1} e^{-a m^2}  (the theta sum with the constant removed)
double theta_tail(double a) {
    double s = 0.0;
    for (int m = 1;; ++m) {
        const double term = 2.0 * std::exp(-a * m * m);
        s += term;
        if (term < 1e-18 * (1.0 + s)) break;
    }
    return s;
}

} // namespace

double heat_trace_eigen(const TorusSpec& spec, double t) {
    const double a1 = 4.0 * kPi * kPi * t / (spec.L1 * spec.L1);
    const double a2 = 4.0 * kPi * kPi * t / (spec.L2 * spec.L2);
    return theta_sum(a1) * theta_sum(a2);
}

double heat_trace_poisson(const TorusSpec& spec, double t) {
    const double b1 = spec.L1 * spec.L1 / (4.0 * t);
    const double b2 = spec.L2 * spec.L2 / (4.0 * t);
    const double f1 = spec.L1 / std::sqrt(4.0 * kPi * t);
    const double f2 = spec.L2 / std::sqrt(4.0 * kPi * t);
    return f1 * theta_sum(b1) * f2 * theta_sum(b2);
}

double heat_trace(const TorusSpec& spec, double t) {
    if (t <= 0.0) throw std::invalid_argument("heat_trace: t must be positive");
    return t >= 1.0 ? heat_trace_eigen(spec, t) : heat_trace_poisson(spec, t);
}

double heat_trace_minus_weyl(const TorusSpec& spec, double t) {
    const double b1 = spec.L1 * spec.L1 / (4.0 * t);
    const double b2 = spec.L2 * spec.L2 / (4.0 * t);
    const double t1 = theta_tail(b1);
    const double t2 = theta_tail(b2);
    const double weyl = spec.area() / (4.0 * kPi * t);
    return weyl * (t1 + t2 + t1 * t2);
}

double zeta_determinant(const TorusSpec& spec) {
    // small-time piece, integrand exponentially small near 0
    const double a0 = integrate_panels(
        [&](double u) { return heat_trace_minus_weyl(spec, u) / u; }, 0.0, 1.0, 16);
    // large-time piece as a sum of exponential integrals over eigenvalues
    double b0 = 0.0;
    const double c1 = 4.0 * kPi * kPi / (spec.L1 * spec.L1);
    const double c2 = 4.0 * kPi * kPi / (spec.L2 * spec.L2);
    const double cut = 50.0; // e^-50 is far below double noise
    const int m1 = static_cast<int>(std::ceil(std::sqrt(cut / c1)));
    const int m2 = static_cast<int>(std::ceil(std::sqrt(cut / c2)));
    for (int m = -m1; m <= m1; ++m)
        for (int n = -m2; n <= m2; ++n) {
            if (m == 0 && n == 0) continue;
            const double lam = c1 * m * m + c2 * n * n;
            if (lam > cut) continue;
            b0 += exp_integral_e1(lam);
        }
    const double log_det = kEulerGamma + spec.area() / (4.0 * kPi) - a0 - b0;
    return std::exp(log_det);
}

double heat_kernel_diagonal_bm(const TorusSpec& spec, double t) {
    return heat_trace(spec, 0.5 * t) / spec.area();
}

namespace {

double wrapped_gaussian_1d(double d, double var, double L) {
    // sum over lattice translates of the N(0, var) density at d
    d -= L * std::round(d / L);
    double s = std::exp(-d * d / (2.0 * var));
    for (int w = 1;; ++w) {
        const double a = d + w * L, b = d - w * L;
        const double add = std::exp(-a * a / (2.0 * var)) + std::exp(-b * b / (2.0 * var));
        s += add;
        if (add < 1e-18 * s) break;
    }
    return s / std::sqrt(2.0 * kPi * var);
}

} // namespace

double heat_kernel_bm(const TorusSpec& spec, Vec2 d, double t) {
    return wrapped_gaussian_1d(d.x, t, spec.L1) * wrapped_gaussian_1d(d.y, t, spec.L2);
}

PaTerms pa_rhs(const TorusSpec& spec, const ConformalField& field, double delta, double C,
               int quad_n) {
    const Box domain{0.0, 0.0, spec.L1, spec.L2};
    const double vol = spec.area();
    const double vol_rho = rho_volume(field, domain, quad_n);
    PaTerms terms;
    terms.vol_rho_over_2pi_delta = vol_rho / (kTwoPi * delta);
    terms.log_C = std::log(C);
    terms.euler_gamma = kEulerGamma;
    terms.dirichlet_over_48pi = dirichlet_energy(field, quad_n) / (48.0 * kPi);
    terms.log_vol = std::log(vol);
    terms.minus_log_vol_rho = -std::log(vol_rho);
    terms.minus_log_det = -std::log(zeta_determinant(spec));
    return terms;
}

double torus_flat_loop_mass_quadrature(const TorusSpec& spec, double delta, double C) {
    // integral of Z(t/2)/t dt = integral of Z(e^s / 2) ds on log scale
    return integrate_panels(
        [&](double s) { return heat_trace(spec, 0.5 * std::exp(s)); }, std::log(delta),
        std::log(C), 64);
}

Vec2 torus_wrap(const TorusSpec& spec, Vec2 p) {
    double x = std::fmod(p.x, spec.L1);
    if (x < 0.0) x += spec.L1;
    double y = std::fmod(p.y, spec.L2);
    if (y < 0.0) y += spec.L2;
    return {x, y};
}

namespace {

int sample_winding(double L, double t, Rng& rng, double& weight_mass) {
    // discrete Gaussian over lattice translates, exact up to 1e-18 tails
    const int W = static_cast<int>(std::ceil(4.5 * std::sqrt(t) / L)) + 1;
    double total = 0.0;
    for (int w = -W; w <= W; ++w) total += std::exp(-(w * L) * (w * L) / (2.0 * t));
    weight_mass = total / (total + 2.0 * std::exp(-((W + 1) * L) * ((W + 1) * L) / (2.0 * t)));
    double u = rng.uniform() * total;
    for (int w = -W; w <= W; ++w) {
        u -= std::exp(-(w * L) * (w * L) / (2.0 * t));
        if (u <= 0.0) return w;
    }
    return W;
}

} // namespace

TorusLoop sample_torus_loop(const TorusSpec& spec, double t, Vec2 root, int n, Rng& rng) {
    TorusLoop loop;
    loop.t = t;
    loop.root = root;
    double mass1 = 1.0, mass2 = 1.0;
    loop.winding1 = sample_winding(spec.L1, t, rng, mass1);
    loop.winding2 = sample_winding(spec.L2, t, rng, mass2);
    if (mass1 < 0.999 || mass2 < 0.999)
        throw std::runtime_error("sample_torus_loop: winding-sector truncation insufficient");
    const Vec2 endpoint{loop.winding1 * spec.L1, loop.winding2 * spec.L2};

    loop.pts.resize(static_cast<std::size_t>(n));
    const double step_sd = std::sqrt(t / n);
    Vec2 w{0.0, 0.0};
    loop.pts[0] = root;
    for (int k = 1; k < n; ++k) {
        w.x += step_sd * rng.normal();
        w.y += step_sd * rng.normal();
        loop.pts[static_cast<std::size_t>(k)] = root + w;
    }
    w.x += step_sd * rng.normal();
    w.y += step_sd * rng.normal();
    for (int k = 1; k < n; ++k) {
        const double frac = static_cast<double>(k) / n;
        loop.pts[static_cast<std::size_t>(k)] += frac * (endpoint - w);
    }
    return loop;
}

double torus_len_rho(const TorusSpec& spec, const ConformalField& field, const TorusLoop& loop) {
    double sum = 0.0;
    for (const Vec2& p : loop.pts) sum += std::exp(field.eval(torus_wrap(spec, p)));
    return loop.t * (sum / static_cast<double>(loop.pts.size()));
}

namespace {

// tabulated inverse CDF of the density Z(t/2)/t restricted to [a, b]
struct TimeSampler {
    std::vector<double> log_t;
    std::vector<double> cdf;
    double total_weight = 0.0;

    TimeSampler(const TorusSpec& spec, double a, double b, int table_size = 4096) {
        const double sa = std::log(a), sb = std::log(b);
        log_t.resize(static_cast<std::size_t>(table_size));
        cdf.resize(static_cast<std::size_t>(table_size));
        std::vector<double> f(static_cast<std::size_t>(table_size));
        for (int i = 0; i < table_size; ++i) {
            const double s = sa + (sb - sa) * i / (table_size - 1);
            log_t[static_cast<std::size_t>(i)] = s;
            f[static_cast<std::size_t>(i)] = heat_trace(spec, 0.5 * std::exp(s));
        }
        double acc = 0.0;
        cdf[0] = 0.0;
        for (int i = 1; i < table_size; ++i) {
            const double ds = log_t[static_cast<std::size_t>(i)] - log_t[static_cast<std::size_t>(i - 1)];
            acc += 0.5 * (f[static_cast<std::size_t>(i)] + f[static_cast<std::size_t>(i - 1)]) * ds;
            cdf[static_cast<std::size_t>(i)] = acc;
        }
        total_weight = acc;
    }

    double sample(double u) const {
        const double target = u * total_weight;
        auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
        std::size_t i = static_cast<std::size_t>(it - cdf.begin());
        if (i == 0) i = 1;
        if (i >= cdf.size()) i = cdf.size() - 1;
        const double c0 = cdf[i - 1], c1 = cdf[i];
        const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
        return std::exp(log_t[i - 1] + frac * (log_t[i] - log_t[i - 1]));
    }
};

struct EdgePartial {
    Accumulator low;
    Accumulator high;
    void merge(const EdgePartial& o) {
        low.merge(o.low);
        high.merge(o.high);
    }
};

} // namespace

TorusMassEstimate torus_loop_mass(const TorusSpec& spec, const ConformalField& field,
                                  double delta, double C, std::int64_t N, Rng rng,
                                  int base_resolution, int workers, int nodes_per_unit_time) {
    if (delta >= C) throw std::invalid_argument("torus_loop_mass: need delta < C");
    if (N < 10000) throw std::invalid_argument("torus_loop_mass: need N >= 10^4");
    const double lam = lambda_bound(field);
    const Box domain{0.0, 0.0, spec.L1, spec.L2};

    TorusMassEstimate est;

    if (lam == 1.0) {
        // rho == 0: the indicator is deterministic, the mass is exact
        est.middle_exact = torus_flat_loop_mass_quadrature(spec, delta, C);
        est.value = est.middle_exact;
        est.n_samples = 0;
        return est;
    }

    const double lo_a = delta / lam, lo_b = delta * lam;
    const double hi_a = C / lam, hi_b = C * lam;
    if (lo_b >= hi_a)
        throw std::invalid_argument("torus_loop_mass: delta and C windows overlap; C too small");

    est.middle_exact = torus_flat_loop_mass_quadrature(spec, lo_b, hi_a);

    const TimeSampler low_sampler(spec, lo_a, lo_b);
    const TimeSampler high_sampler(spec, hi_a, hi_b);
    est.edge_weight = low_sampler.total_weight + high_sampler.total_weight;

    // split samples between the edge windows in proportion to their weight
    const std::int64_t n_low = static_cast<std::int64_t>(
        static_cast<double>(N) * low_sampler.total_weight / est.edge_weight);
    const std::int64_t n_high = N - n_low;

    auto node_count = [&](double t) {
        const int by_time = static_cast<int>(std::ceil(t * nodes_per_unit_time));
        return std::max(base_resolution, by_time);
    };

    auto result = parallel_blocks<EdgePartial>(
        N, kDefaultBlockSize, workers, [&](std::int64_t, std::int64_t first, std::int64_t last) {
            EdgePartial part;
            for (std::int64_t i = first; i < last; ++i) {
                const bool low = i < n_low;
                const TimeSampler& ts = low ? low_sampler : high_sampler;
                Rng stream = rng.substream(static_cast<std::uint64_t>(i));
                const double t = ts.sample(stream.uniform());
                const Vec2 root = stream.uniform_in(domain);
                const TorusLoop loop = sample_torus_loop(spec, t, root, node_count(t), stream);
                const double len = torus_len_rho(spec, field, loop);
                const double ind = (len >= delta && len <= C) ? 1.0 : 0.0;
                if (low)
                    part.low.add(ind);
                else
                    part.high.add(ind);
            }
            return part;
        });

    const double w_low = low_sampler.total_weight, w_high = high_sampler.total_weight;
    est.value = est.middle_exact + w_low * result.low.mean() + w_high * result.high.mean();
    est.std_error = std::sqrt(w_low * w_low * result.low.std_error() * result.low.std_error() +
                              w_high * w_high * result.high.std_error() * result.high.std_error());
    est.n_samples = N;
    return est;
}

} // namespace la
