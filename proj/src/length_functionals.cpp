#include "loopanomaly/length_functionals.hpp"

#include <cmath>
#include <stdexcept>

namespace la {

double len_rho(const ConformalField& field, Vec2 x, double t, const UnitLoop& loop) {
    const double root_t = std::sqrt(t);
    double sum = 0.0;
    for (const Vec2& p : loop.pts) sum += std::exp(field.eval({x.x + root_t * p.x, x.y + root_t * p.y}));
    return t * (sum / static_cast<double>(loop.pts.size()));
}

double clen_rho(const ConformalField& field, Vec2 x, double t) {
    return std::exp(field.eval(x)) * t;
}

double beta_threshold(const ConformalField& field, Vec2 x, double delta) {
    return std::exp(-field.eval(x)) * delta;
}

double lambda_bound(const ConformalField& field) { return std::exp(field.sup_abs()); }

ThresholdResult alpha_threshold(const ConformalField& field, Vec2 x, double delta,
                                const UnitLoop& loop, double d_star, double loop_diameter) {
    if (delta <= 0.0) throw std::invalid_argument("alpha_threshold: delta must be positive");
    if (d_star <= 0.0) throw std::invalid_argument("alpha_threshold: d_star must be positive");

    ThresholdResult res;
    res.beta = beta_threshold(field, x, delta);

    const double diam = loop_diameter >= 0.0 ? loop_diameter : loop.diameter();
    if (diam * std::sqrt(delta) >= d_star) {
        res.alpha = delta;
        res.fallback_used = true;
        return res;
    }

    const double tol_f = 1e-10 * delta;
    const double tol_t = 1e-12;

    // the secant/fixed-point iterate is t <- delta / A(sqrt(t)), with
    // A(r) the path average of e^rho; len_rho(t) = t A(sqrt(t))
    double t = res.beta;
    double f = len_rho(field, x, t, loop) - delta;
    if (std::abs(f) <= tol_f) {
        res.alpha = t;
        return res;
    }

    const double lam = lambda_bound(field);
    double lo = delta / lam, hi = delta * lam;
    const double f_lo = len_rho(field, x, lo, loop) - delta;
    const double f_hi = len_rho(field, x, hi, loop) - delta;
    res.iterations = 3;
    if (f_lo > 0.0 || f_hi < 0.0)
        throw std::runtime_error(
            "alpha_threshold: bracket does not straddle delta; "
            "discretization too coarse or d_star too large");

    if (f > 0.0)
        hi = t;
    else
        lo = t;

    for (int it = 0; it < 200; ++it) {
        // fixed-point proposal, clipped into the open bracket; fall back to
        // bisection whenever the proposal leaves it
        double next = delta * t / (f + delta); // = delta / A(sqrt(t))
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double fn = len_rho(field, x, next, loop) - delta;
        ++res.iterations;
        if (fn > 0.0)
            hi = next;
        else
            lo = next;
        const double dt = std::abs(next - t);
        t = next;
        f = fn;
        if (std::abs(f) <= tol_f || dt <= tol_t * t || (hi - lo) <= tol_t * t) break;
    }
    res.alpha = t;
    return res;
}

} // namespace la
