#include "loopanomaly/loop_mass.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "loopanomaly/parallel.hpp"
#include "loopanomaly/stats.hpp"

namespace la {

double clen_mass_exact(const ConformalField& field, const Box& D, double delta,
                       const MeasureSpec& measure, int quad_n) {
    return measure.normalization * rho_volume(field, D, quad_n) / delta;
}

namespace {

struct DirectPartial {
    Accumulator acc;
    std::int64_t fallbacks = 0;
    void merge(const DirectPartial& o) {
        acc.merge(o.acc);
        fallbacks += o.fallbacks;
    }
};

} // namespace

AnomalyEstimate estimate_anomaly_direct(const ConformalField& field, const Box& D, double delta,
                                        const MeasureSpec& measure, std::int64_t N, Rng rng,
                                        const DirectOptions& options) {
    if (N < 1000) throw std::invalid_argument("estimate_anomaly_direct: need N >= 1000");
    const double prefactor = measure.normalization * D.area();
    const auto fixed_diam = measure.fixed_diameter();

    auto result = parallel_blocks<DirectPartial>(
        N, kDefaultBlockSize, options.workers,
        [&](std::int64_t, std::int64_t first, std::int64_t last) {
            DirectPartial part;
            for (std::int64_t i = first; i < last; ++i) {
                Rng stream = rng.substream(static_cast<std::uint64_t>(i));
                const Vec2 x = stream.uniform_in(D);
                const UnitLoop loop = sample_unit_loop(measure, options.loop_resolution, stream);
                const double diam = fixed_diam ? *fixed_diam : loop.diameter();
                const ThresholdResult th =
                    alpha_threshold(field, x, delta, loop, options.d_star, diam);
                if (th.fallback_used) ++part.fallbacks;
                part.acc.add(prefactor * (1.0 / th.alpha - 1.0 / th.beta));
            }
            return part;
        });

    AnomalyEstimate est;
    est.value = result.acc.mean();
    est.std_error = result.acc.std_error();
    est.delta = delta;
    est.n_samples = result.acc.count;
    est.estimator = EstimatorKind::direct;
    est.measure = measure.name();
    est.field_id = field.describe();
    est.fallback_rate = static_cast<double>(result.fallbacks) / static_cast<double>(N);
    est.seed = rng.path_seed();
    if (est.fallback_rate > options.max_fallback_rate) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "estimate_anomaly_direct: fallback rate %.3f exceeds %.3f; delta=%g is too "
                      "large for the loop-diameter distribution",
                      est.fallback_rate, options.max_fallback_rate, delta);
        throw std::runtime_error(buf);
    }
    return est;
}

namespace {

struct RatioPartial {
    // sufficient statistics for the self-normalized ratio estimator
    double sw = 0.0, swg = 0.0, sw2 = 0.0, sw2g = 0.0, sw2g2 = 0.0;
    std::int64_t count = 0;
    void add(double w, double g) {
        sw += w;
        swg += w * g;
        sw2 += w * w;
        sw2g += w * w * g;
        sw2g2 += w * w * g * g;
        ++count;
    }
    void merge(const RatioPartial& o) {
        sw += o.sw;
        swg += o.swg;
        sw2 += o.sw2;
        sw2g += o.sw2g;
        sw2g2 += o.sw2g2;
        count += o.count;
    }
};

} // namespace

AnomalyEstimate estimate_discrepancy(const ConformalField& field, const Box& D, double delta,
                                     const MeasureSpec& measure, std::int64_t N, Rng rng,
                                     DiscrepancyWeighting weighting, int loop_resolution,
                                     int workers) {
    if (N < 1000) throw std::invalid_argument("estimate_discrepancy: need N >= 1000");
    const double prefactor = measure.normalization * D.area();
    const bool weighted = weighting == DiscrepancyWeighting::importance_center;

    auto result = parallel_blocks<RatioPartial>(
        N, kDefaultBlockSize, workers, [&](std::int64_t, std::int64_t first, std::int64_t last) {
            RatioPartial part;
            for (std::int64_t i = first; i < last; ++i) {
                Rng stream = rng.substream(static_cast<std::uint64_t>(i));
                const Vec2 x = stream.uniform_in(D);
                const UnitLoop loop = sample_unit_loop(measure, loop_resolution, stream);
                const int node = static_cast<int>(
                    stream.uniform_index(static_cast<std::uint64_t>(loop_resolution)));
                const double rho_x = field.eval(x);
                const double beta = std::exp(-rho_x) * delta;
                const double root_beta = std::sqrt(beta);
                const Vec2 p = loop.pts[static_cast<std::size_t>(node)];
                const Vec2 z{x.x + root_beta * p.x, x.y + root_beta * p.y};
                const double g = (std::exp(field.eval(z)) - std::exp(rho_x)) / delta;
                part.add(weighted ? std::exp(rho_x) : 1.0, g);
            }
            return part;
        });

    const double ratio = result.swg / result.sw;
    // linearized variance of the ratio estimator; with unit weights this is
    // the plain sample variance of g
    const double var_num =
        (result.sw2g2 - 2.0 * ratio * result.sw2g + ratio * ratio * result.sw2);
    const double se_ratio = std::sqrt(std::max(0.0, var_num)) / result.sw;

    AnomalyEstimate est;
    est.value = prefactor * ratio;
    est.std_error = prefactor * se_ratio;
    est.delta = delta;
    est.n_samples = result.count;
    est.estimator = EstimatorKind::discrepancy;
    est.measure = measure.name();
    est.field_id = field.describe();
    est.seed = rng.path_seed();
    return est;
}

MassEstimate mass_direct_bruteforce(const ConformalField& field, const Box& D, double delta,
                                    const MeasureSpec& measure, std::int64_t N, double t_max,
                                    Rng rng, int loop_resolution, int n_strata, int workers) {
    const double lam = lambda_bound(field);
    if (t_max < lam * delta)
        throw std::invalid_argument("mass_direct_bruteforce: t_max must be >= Lambda * delta");
    const double prefactor = measure.normalization * D.area();

    // Decomposition: with beta = beta(x) always inside [delta/Lambda,
    // delta*Lambda], the mass of {len_rho >= delta, len <= t_max} equals the
    // exact clen mass normalization*Vol_rho(D)/delta - prefactor/t_max plus
    // the integral of 1{len_rho >= delta} - 1{t >= beta}.  The two-sided
    // ratio bound confines that difference to t in [delta/Lambda,
    // delta*Lambda], which is all the sampling has to cover.
    MassEstimate est;
    est.tail_exact = prefactor / t_max;
    const double clen_total = clen_mass_exact(field, D, delta, measure);

    if (lam == 1.0) {
        // flat field: the indicators coincide everywhere
        est.value = clen_total;
        est.std_error = 0.0;
        est.n_samples = 0;
        return est;
    }

    const double t_lo = delta / lam;
    const double t_hi = std::min(delta * lam, t_max);
    const std::size_t S = static_cast<std::size_t>(n_strata);

    // log-uniform strata edges; within a stratum t is drawn from the exact
    // t^-2 density by inverse CDF
    std::vector<double> edges(S + 1);
    for (std::size_t j = 0; j <= S; ++j)
        edges[j] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(j) / S);

    const std::int64_t per_stratum = std::max<std::int64_t>(1, N / n_strata);
    const std::int64_t total = per_stratum * n_strata;

    struct DiffPartial {
        std::vector<Accumulator> acc;
        void ensure(std::size_t n) {
            if (acc.size() < n) acc.resize(n);
        }
        void merge(const DiffPartial& o) {
            ensure(o.acc.size());
            for (std::size_t j = 0; j < o.acc.size(); ++j) acc[j].merge(o.acc[j]);
        }
    };

    auto result = parallel_blocks<DiffPartial>(
        total, kDefaultBlockSize, workers,
        [&](std::int64_t, std::int64_t first, std::int64_t last) {
            DiffPartial part;
            part.ensure(S);
            for (std::int64_t i = first; i < last; ++i) {
                const std::size_t j = static_cast<std::size_t>(i / per_stratum);
                Rng stream = rng.substream(static_cast<std::uint64_t>(i));
                const Vec2 x = stream.uniform_in(D);
                const UnitLoop loop = sample_unit_loop(measure, loop_resolution, stream);
                const double a = edges[j], b = edges[j + 1];
                const double u = stream.uniform();
                const double t = 1.0 / (1.0 / a - u * (1.0 / a - 1.0 / b));
                const double len_ind = len_rho(field, x, t, loop) >= delta ? 1.0 : 0.0;
                const double clen_ind = t >= beta_threshold(field, x, delta) ? 1.0 : 0.0;
                part.acc[j].add(len_ind - clen_ind);
            }
            return part;
        });

    est.value = clen_total;
    double var = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
        const double w = prefactor * (1.0 / edges[j] - 1.0 / edges[j + 1]);
        est.value += w * result.acc[j].mean();
        const double se = result.acc[j].std_error();
        var += w * w * se * se;
    }
    est.std_error = std::sqrt(var);
    est.n_samples = total;
    return est;
}

std::vector<AnomalyEstimate> delta_sweep(const ConformalField& field, const Box& D,
                                         const std::vector<double>& deltas,
                                         const MeasureSpec& measure, std::int64_t N, Rng rng,
                                         const DirectOptions& options) {
    for (std::size_t i = 0; i + 1 < deltas.size(); ++i)
        if (!(deltas[i] > deltas[i + 1]))
            throw std::invalid_argument("delta_sweep: deltas must be descending");
    for (double d : deltas)
        if (d <= 0.0) throw std::invalid_argument("delta_sweep: deltas must be positive");

    // the same substream root for every delta: common random numbers
    std::vector<AnomalyEstimate> out;
    out.reserve(deltas.size());
    for (double d : deltas)
        out.push_back(estimate_anomaly_direct(field, D, d, measure, N, rng, options));
    return out;
}

} // namespace la
