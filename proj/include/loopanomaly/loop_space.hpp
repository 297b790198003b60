#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopanomaly/geometry.hpp"
#include "loopanomaly/rng.hpp"

namespace la {

// Zero-centered loop on the time interval [0,1], stored as n samples at
// times k/n.  Index arithmetic is cyclic; the segment from point n-1 back to
// point 0 closes the loop.  Samplers subtract the sample mean, so the mean
// of pts is zero up to round-off.
struct UnitLoop {
    std::vector<Vec2> pts;

    int n() const { return static_cast<int>(pts.size()); }

    Vec2 at_node(int k) const {
        const int nn = n();
        k %= nn;
        if (k < 0) k += nn;
        return pts[static_cast<std::size_t>(k)];
    }

    // piecewise-linear evaluation at time s in [0,1], cyclic
    Vec2 at_time(double s) const {
        const int nn = n();
        double u = (s - std::floor(s)) * nn;
        int k = static_cast<int>(u);
        if (k >= nn) k = nn - 1;
        const double frac = u - k;
        const Vec2 a = pts[static_cast<std::size_t>(k)];
        const Vec2 b = pts[static_cast<std::size_t>((k + 1) % nn)];
        return a + frac * (b - a);
    }

    Vec2 mean() const;

    // exact max pairwise distance over the sample points
    double diameter() const;
};

// Loop in the plane as (center, time-length, shape):
// the concrete path is s -> sqrt(t) * unit_loop(s/t) + x for s in [0,t].
struct LoopTriple {
    Vec2 x;
    double t = 1.0;
    UnitLoop unit_loop;
};

Vec2 embed(const LoopTriple& L, double s);

enum class SamplerKind : std::uint8_t { brownian_bridge = 0, circle = 1, square = 2 };

const char* sampler_name(SamplerKind k);
SamplerKind sampler_from_name(const std::string& name);

// A rotationally invariant unit-loop law together with the normalization
// constant of the loop measure density  normalization * t^-2 dx dt dl.
// The Brownian measure carries 1/(2*pi); generalized measures carry 1.
struct MeasureSpec {
    SamplerKind kind = SamplerKind::brownian_bridge;
    double radius = 1.0;     // circle kind
    double half_width = 1.0; // square kind
    double normalization = 1.0;
    mutable std::optional<double> b; // cached occupation moment

    static MeasureSpec brownian() {
        MeasureSpec m;
        m.kind = SamplerKind::brownian_bridge;
        m.normalization = 1.0 / kTwoPiLocal;
        return m;
    }
    static MeasureSpec circle(double R) {
        MeasureSpec m;
        m.kind = SamplerKind::circle;
        m.radius = R;
        m.normalization = 1.0;
        return m;
    }
    static MeasureSpec square(double a) {
        MeasureSpec m;
        m.kind = SamplerKind::square;
        m.half_width = a;
        m.normalization = 1.0;
        return m;
    }

    // exact shape diameter where the sampler makes it deterministic
    std::optional<double> fixed_diameter() const {
        if (kind == SamplerKind::circle) return 2.0 * radius;
        if (kind == SamplerKind::square) return 2.0 * half_width * 1.41421356237309504880;
        return std::nullopt;
    }

    std::string name() const;

  private:
    static constexpr double kTwoPiLocal = 6.283185307179586476925286766559;
};

// Samples one unit loop at resolution n.  Throws std::invalid_argument for
// n < 4.  brownian_bridge: exact Gaussian bridge at the grid times (random
// walk minus the linear endpoint correction, per coordinate) minus the
// sample mean.  circle: radius R with uniform phase.  square: boundary of
// [-a,a]^2 at constant speed, uniform start and uniform rotation.
UnitLoop sample_unit_loop(const MeasureSpec& spec, int n, Rng& rng);

// Circle loop at a forced phase, no randomness; used by tests and fixtures.
UnitLoop circle_loop(double radius, int n, double phase);

struct MomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
};

// Monte Carlo estimate of the occupation moment b: the second central
// moment of one coordinate of the loop position at a uniform time.  The
// per-loop statistic averages the squared coordinates over all nodes and
// both coordinates (same estimand, by rotational invariance).  For the
// Brownian bridge, low Fourier modes with closed-form discrete variances
// are subtracted as control variates.  Caches the value into spec.b.
MomentEstimate occupation_moment_b(const MeasureSpec& spec, int n, std::int64_t N, Rng rng,
                                   int workers = 1);

struct ScalingCheckResult {
    double max_abs_deviation = 0.0;   // sup over occupied bins of |H_s - t*H_ts|
    double max_sigma_deviation = 0.0; // same, in combined std errors
    double frac_bins_over_3se = 0.0;
    int bins_per_side = 0;
    std::int64_t n_samples = 0;
};

// Verifies the occupation-measure scaling law theta(z/sqrt(t), s) =
// t * theta(z, ts) by comparing two independently estimated histograms on
// scale-matched bins.  Substreams are keyed by the time-length, so at t = 1
// both histograms use the same stream and the deviation is exactly zero.
ScalingCheckResult occupation_scaling_check(const MeasureSpec& spec, double t, double s,
                                            int bins_per_side, std::int64_t N, Rng rng,
                                            int loop_resolution = 256);

// Histogram of the loop position at a uniform time for a loop of
// time-length s (the occupation density estimate behind the scaling check).
struct OccupationHistogram {
    double extent = 0.0; // bins cover [-extent, extent]^2
    int bins = 0;
    std::int64_t n_samples = 0;
    std::vector<std::int64_t> counts; // row-major bins x bins

    double density(int i, int j) const;
    double density_sigma(int i, int j) const;
};

OccupationHistogram occupation_histogram(const MeasureSpec& spec, double s, double extent,
                                         int bins, std::int64_t N, Rng rng, int loop_resolution);

// Flat binary record: u32 point count, u8 sampler tag, then 2n doubles
// (x0,y0,x1,y1,...), little-endian.
void write_loop(std::ostream& out, const UnitLoop& loop, SamplerKind kind);
std::pair<UnitLoop, SamplerKind> read_loop(std::istream& in);
void write_loop_csv(std::ostream& out, const UnitLoop& loop);

} // namespace la
