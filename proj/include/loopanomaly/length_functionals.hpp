#pragma once

#include <cstdint>

#include "loopanomaly/conformal_field.hpp"
#include "loopanomaly/loop_space.hpp"

namespace la {

// Lengths of a loop (x, t, l) against the metric e^rho |dz|^2.  rho-length
// scales like area (Brownian paths have dimension 2), so it integrates
// e^rho, not e^{rho/2}, along the path.

// Cyclic trapezoid over the loop's own n sample times: t * mean_k
// e^{rho(x + sqrt(t) l_k)}.  Refining beyond the n nodes is not meaningful
// because the path is piecewise linear between samples.
double len_rho(const ConformalField& field, Vec2 x, double t, const UnitLoop& loop);

inline double len_rho(const ConformalField& field, const LoopTriple& L) {
    return len_rho(field, L.x, L.t, L.unit_loop);
}

// Frozen-coefficient length e^{rho(x)} * t; exact, no quadrature.
double clen_rho(const ConformalField& field, Vec2 x, double t);

inline double clen_rho(const ConformalField& field, const LoopTriple& L) {
    return clen_rho(field, L.x, L.t);
}

// Time-length at which the center rho-length reaches delta:
// beta = e^{-rho(x)} delta.
double beta_threshold(const ConformalField& field, Vec2 x, double delta);

// Two-sided ratio bound Lambda = e^{sup|rho|}: for every triple,
// Lambda^-1 <= len_rho / len <= Lambda.
double lambda_bound(const ConformalField& field);

struct ThresholdResult {
    double alpha = 0.0;
    double beta = 0.0;
    bool fallback_used = false; // diam(l) sqrt(delta) >= d_star; alpha set to delta
    int iterations = 0;
};

inline constexpr double kDefaultDStar = 0.5;

// Solves len_rho(x, t, l) = delta for t on the bracket
// [delta/Lambda, delta*Lambda], where the map t -> len_rho is strictly
// increasing for small diam(l) sqrt(delta).  A secant/fixed-point step from
// beta is safeguarded by bisection; relative tolerance 1e-10.  When
// diam(l) sqrt(delta) >= d_star the convention alpha = delta applies and
// fallback_used is set.  The precomputed loop diameter may be passed to
// avoid recomputation.  Throws std::runtime_error if the bracket fails to
// straddle delta (discretization too coarse or d_star too large).
ThresholdResult alpha_threshold(const ConformalField& field, Vec2 x, double delta,
                                const UnitLoop& loop, double d_star = kDefaultDStar,
                                double loop_diameter = -1.0);

} // namespace la
