#include "loopanomaly/loop_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "loopanomaly/parallel.hpp"
#include "loopanomaly/special.hpp"
#include "loopanomaly/stats.hpp"

namespace la {

Vec2 UnitLoop::mean() const {
    Vec2 m{0.0, 0.0};
    for (const Vec2& p : pts) m += p;
    return m * (1.0 / static_cast<double>(pts.size()));
}

namespace {

// Andrew monotone chain; returns hull in counter-clockwise order.
std::vector<Vec2> convex_hull(std::vector<Vec2> p) {
    std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    p.erase(std::unique(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
            p.end());
    const std::size_t n = p.size();
    if (n <= 2) return p;
    auto cross = [](Vec2 o, Vec2 a, Vec2 b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Vec2> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return h;
}

} // namespace

double UnitLoop::diameter() const {
    const std::vector<Vec2> h = convex_hull(pts);
    const std::size_t m = h.size();
    if (m <= 1) return 0.0;
    if (m == 2) return (h[1] - h[0]).norm();
    // rotating calipers
    double best = 0.0;
    std::size_t j = 1;
    auto area2 = [&](std::size_t a, std::size_t b, std::size_t c) {
        return std::abs((h[b].x - h[a].x) * (h[c].y - h[a].y) -
                        (h[b].y - h[a].y) * (h[c].x - h[a].x));
    };
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t next = (i + 1) % m;
        while (area2(i, next, (j + 1) % m) > area2(i, next, j)) j = (j + 1) % m;
        best = std::max(best, (h[i] - h[j]).norm2());
        best = std::max(best, (h[next] - h[j]).norm2());
    }
    return std::sqrt(best);
}

Vec2 embed(const LoopTriple& L, double s) {
    if (s < 0.0 || s > L.t) throw std::domain_error("embed: time outside [0, t]");
    const double root_t = std::sqrt(L.t);
    return root_t * L.unit_loop.at_time(s / L.t) + L.x;
}

const char* sampler_name(SamplerKind k) {
    switch (k) {
        case SamplerKind::brownian_bridge: return "brownian_bridge";
        case SamplerKind::circle: return "circle";
        case SamplerKind::square: return "square";
    }
    return "unknown";
}

SamplerKind sampler_from_name(const std::string& name) {
    if (name == "brownian_bridge" || name == "brownian") return SamplerKind::brownian_bridge;
    if (name == "circle") return SamplerKind::circle;
    if (name == "square") return SamplerKind::square;
    throw std::invalid_argument("unknown sampler kind: " + name);
}

std::string MeasureSpec::name() const {
    switch (kind) {
        case SamplerKind::brownian_bridge: return "brownian_bridge";
        case SamplerKind::circle: return "circle(R=" + std::to_string(radius) + ")";
        case SamplerKind::square: return "square(a=" + std::to_string(half_width) + ")";
    }
    return "unknown";
}

UnitLoop circle_loop(double radius, int n, double phase) {
    UnitLoop loop;
    loop.pts.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double a = kTwoPi * (static_cast<double>(k) / n + phase);
        loop.pts[static_cast<std::size_t>(k)] = {radius * std::cos(a), radius * std::sin(a)};
    }
    return loop;
}

namespace {

void subtract_mean(UnitLoop& loop) {
    const Vec2 m = loop.mean();
    for (Vec2& p : loop.pts) p -= m;
}

UnitLoop sample_bridge(int n, Rng& rng) {
    UnitLoop loop;
    loop.pts.resize(static_cast<std::size_t>(n));
    const double step_sd = std::sqrt(1.0 / n);
    Vec2 w{0.0, 0.0};
    loop.pts[0] = {0.0, 0.0};
    for (int k = 1; k < n; ++k) {
        w.x += step_sd * rng.normal();
        w.y += step_sd * rng.normal();
        loop.pts[static_cast<std::size_t>(k)] = w;
    }
    // closing increment; conditioning the walk to return is the same as
    // subtracting the linear interpolation of the endpoint
    w.x += step_sd * rng.normal();
    w.y += step_sd * rng.normal();
    for (int k = 1; k < n; ++k) {
        const double frac = static_cast<double>(k) / n;
        loop.pts[static_cast<std::size_t>(k)] -= frac * w;
    }
    subtract_mean(loop);
    return loop;
}

UnitLoop sample_square(double a, int n, Rng& rng) {
    const double start = rng.uniform(); // traversal phase
    const double angle = kTwoPi * rng.uniform();
    UnitLoop loop;
    loop.pts.resize(static_cast<std::size_t>(n));
    const double perimeter = 8.0 * a;
    for (int k = 0; k < n; ++k) {
        double u = start + static_cast<double>(k) / n;
        u -= std::floor(u);
        const double arc = u * perimeter;
        const int side = static_cast<int>(arc / (2.0 * a));
        const double along = arc - 2.0 * a * side - a;
        Vec2 p;
        switch (side) {
            case 0: p = {along, -a}; break;
            case 1: p = {a, along}; break;
            case 2: p = {-along, a}; break;
            default: p = {-a, -along}; break;
        }
        loop.pts[static_cast<std::size_t>(k)] = p.rotated(angle);
    }
    subtract_mean(loop);
    return loop;
}

} // namespace

UnitLoop sample_unit_loop(const MeasureSpec& spec, int n, Rng& rng) {
    if (n < 4) throw std::invalid_argument("sample_unit_loop: resolution n must be >= 4");
    switch (spec.kind) {
        case SamplerKind::brownian_bridge: return sample_bridge(n, rng);
        case SamplerKind::circle: {
            UnitLoop loop = circle_loop(spec.radius, n, rng.uniform());
            subtract_mean(loop);
            return loop;
        }
        case SamplerKind::square: return sample_square(spec.half_width, n, rng);
    }
    throw std::invalid_argument("sample_unit_loop: unknown sampler kind");
}

namespace {

struct MomentPartial {
    Accumulator acc;
    void merge(const MomentPartial& o) { acc.merge(o.acc); }
};

} // namespace

MomentEstimate occupation_moment_b(const MeasureSpec& spec, int n, std::int64_t N, Rng rng,
                                   int workers) {
    if (N < 1000) throw std::invalid_argument("occupation_moment_b: need N >= 1000 samples");
    if (n < 4) throw std::invalid_argument("occupation_moment_b: resolution n must be >= 4");

    const bool use_cv = spec.kind == SamplerKind::brownian_bridge;
    const int n_modes = use_cv ? std::min(4, n / 2 - 1) : 0;

    // node-angle table; cos(2*pi*m*k/n) = cos_tab[(m*k) % n]
    std::vector<double> cos_tab(static_cast<std::size_t>(n)), sin_tab(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        cos_tab[static_cast<std::size_t>(k)] = std::cos(kTwoPi * k / n);
        sin_tab[static_cast<std::size_t>(k)] = std::sin(kTwoPi * k / n);
    }
    // exact discrete variance of the mode-m projection pair (per coordinate)
    std::vector<double> mode_mean(static_cast<std::size_t>(n_modes));
    for (int m = 1; m <= n_modes; ++m) {
        const double s = std::sin(kPi * m / n);
        mode_mean[static_cast<std::size_t>(m - 1)] =
            1.0 / (static_cast<double>(n) * n * s * s);
    }

    auto result = parallel_blocks<MomentPartial>(
        N, kDefaultBlockSize, workers, [&](std::int64_t, std::int64_t first, std::int64_t last) {
            MomentPartial part;
            for (std::int64_t i = first; i < last; ++i) {
                Rng stream = rng.substream(static_cast<std::uint64_t>(i));
                const UnitLoop loop = sample_unit_loop(spec, n, stream);
                double path_ms = 0.0;
                for (const Vec2& p : loop.pts) path_ms += p.norm2();
                path_ms /= 2.0 * n; // both coordinates, all nodes
                double y = path_ms;
                for (int m = 1; m <= n_modes; ++m) {
                    double cx = 0, sx = 0, cy = 0, sy = 0;
                    for (int k = 0; k < n; ++k) {
                        const std::size_t idx = static_cast<std::size_t>(
                            (static_cast<std::int64_t>(m) * k) % n);
                        const Vec2 p = loop.pts[static_cast<std::size_t>(k)];
                        cx += p.x * cos_tab[idx];
                        sx += p.x * sin_tab[idx];
                        cy += p.y * cos_tab[idx];
                        sy += p.y * sin_tab[idx];
                    }
                    const double scale = 2.0 / n;
                    cx *= scale; sx *= scale; cy *= scale; sy *= scale;
                    const double mode_sq = 0.25 * (cx * cx + sx * sx + cy * cy + sy * sy);
                    y -= mode_sq - 0.5 * mode_mean[static_cast<std::size_t>(m - 1)];
                }
                part.acc.add(y);
            }
            return part;
        });

    MomentEstimate est;
    est.value = result.acc.mean();
    est.std_error = result.acc.std_error();
    est.n_samples = result.acc.count;
    spec.b = est.value;
    return est;
}

double OccupationHistogram::density(int i, int j) const {
    const double w = 2.0 * extent / bins;
    const double c = static_cast<double>(counts[static_cast<std::size_t>(i) * bins + j]);
    return c / (static_cast<double>(n_samples) * w * w);
}

double OccupationHistogram::density_sigma(int i, int j) const {
    const double w = 2.0 * extent / bins;
    const double p = static_cast<double>(counts[static_cast<std::size_t>(i) * bins + j]) /
                     static_cast<double>(n_samples);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples)) / (w * w);
}

OccupationHistogram occupation_histogram(const MeasureSpec& spec, double s, double extent,
                                         int bins, std::int64_t N, Rng rng, int loop_resolution) {
    OccupationHistogram h;
    h.extent = extent;
    h.bins = bins;
    h.n_samples = N;
    h.counts.assign(static_cast<std::size_t>(bins) * bins, 0);
    const double root_s = std::sqrt(s);
    const double w = 2.0 * extent / bins;
    for (std::int64_t i = 0; i < N; ++i) {
        Rng stream = rng.substream(static_cast<std::uint64_t>(i));
        const UnitLoop loop = sample_unit_loop(spec, loop_resolution, stream);
        const int node = static_cast<int>(stream.uniform_index(static_cast<std::uint64_t>(loop_resolution)));
        const Vec2 p = root_s * loop.at_node(node);
        const int bi = static_cast<int>(std::floor((p.x + extent) / w));
        const int bj = static_cast<int>(std::floor((p.y + extent) / w));
        if (bi >= 0 && bi < bins && bj >= 0 && bj < bins)
            ++h.counts[static_cast<std::size_t>(bi) * bins + bj];
    }
    return h;
}

namespace {

std::uint64_t double_key(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    return bits;
}

} // namespace

ScalingCheckResult occupation_scaling_check(const MeasureSpec& spec, double t, double s,
                                            int bins_per_side, std::int64_t N, Rng rng,
                                            int loop_resolution) {
    if (t <= 0.0 || s <= 0.0)
        throw std::invalid_argument("occupation_scaling_check: t and s must be positive");
    if (bins_per_side < 2)
        throw std::invalid_argument("occupation_scaling_check: bin count incompatible with resolution");
    const double expected_hits =
        static_cast<double>(N) / (static_cast<double>(bins_per_side) * bins_per_side);
    if (expected_hits < 100.0)
        throw std::invalid_argument(
            "occupation_scaling_check: bin count incompatible with resolution "
            "(fewer than 100 expected hits per bin)");

    // extent covers essentially all of theta(.,s) for all three samplers
    const double scale = spec.kind == SamplerKind::brownian_bridge
                             ? 1.6
                             : 1.2 * (spec.kind == SamplerKind::circle ? spec.radius
                                                                       : 2.0 * spec.half_width);
    const double extent_s = scale * std::sqrt(s);
    const double root_t = std::sqrt(t);

    const OccupationHistogram h1 = occupation_histogram(
        spec, s, extent_s, bins_per_side, N, rng.substream(double_key(s)), loop_resolution);
    const OccupationHistogram h2 =
        occupation_histogram(spec, t * s, extent_s * root_t, bins_per_side, N,
                             rng.substream(double_key(t * s)), loop_resolution);

    ScalingCheckResult res;
    res.bins_per_side = bins_per_side;
    res.n_samples = N;
    std::int64_t occupied = 0, over3 = 0;
    for (int i = 0; i < bins_per_side; ++i) {
        for (int j = 0; j < bins_per_side; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * bins_per_side + j;
            if (h1.counts[idx] == 0 && h2.counts[idx] == 0) continue;
            ++occupied;
            const double d = std::abs(h1.density(i, j) - t * h2.density(i, j));
            const double s1 = h1.density_sigma(i, j);
            const double s2 = t * h2.density_sigma(i, j);
            const double sigma = std::sqrt(s1 * s1 + s2 * s2);
            res.max_abs_deviation = std::max(res.max_abs_deviation, d);
            if (sigma > 0.0) {
                const double z = d / sigma;
                res.max_sigma_deviation = std::max(res.max_sigma_deviation, z);
                if (z > 3.0) ++over3;
            }
        }
    }
    res.frac_bins_over_3se =
        occupied > 0 ? static_cast<double>(over3) / static_cast<double>(occupied) : 0.0;
    return res;
}

void write_loop(std::ostream& out, const UnitLoop& loop, SamplerKind kind) {
    const std::uint32_t n = static_cast<std::uint32_t>(loop.pts.size());
    const std::uint8_t tag = static_cast<std::uint8_t>(kind);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&tag), sizeof tag);
    for (const Vec2& p : loop.pts) {
        out.write(reinterpret_cast<const char*>(&p.x), sizeof p.x);
        out.write(reinterpret_cast<const char*>(&p.y), sizeof p.y);
    }
}

std::pair<UnitLoop, SamplerKind> read_loop(std::istream& in) {
    std::uint32_t n = 0;
    std::uint8_t tag = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&tag), sizeof tag);
    if (!in) throw std::runtime_error("read_loop: truncated header");
    UnitLoop loop;
    loop.pts.resize(n);
    for (Vec2& p : loop.pts) {
        in.read(reinterpret_cast<char*>(&p.x), sizeof p.x);
        in.read(reinterpret_cast<char*>(&p.y), sizeof p.y);
    }
    if (!in) throw std::runtime_error("read_loop: truncated payload");
    return {std::move(loop), static_cast<SamplerKind>(tag)};
}

void write_loop_csv(std::ostream& out, const UnitLoop& loop) {
    out << "index,x,y\n";
    char buf[80];
    for (std::size_t k = 0; k < loop.pts.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k, loop.pts[k].x, loop.pts[k].y);
        out << buf;
    }
}

} // namespace la
