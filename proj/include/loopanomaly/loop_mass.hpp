#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loopanomaly/conformal_field.hpp"
#include "loopanomaly/geometry.hpp"
#include "loopanomaly/length_functionals.hpp"
#include "loopanomaly/loop_space.hpp"
#include "loopanomaly/rng.hpp"

namespace la {

// Monte Carlo machinery for loop masses under the measure
// normalization * t^-2 dx dt dl and the constant-order correction that the
// rho-length cutoff adds over the center-length cutoff.  The correction
// tends to sign * (b/2) (rho,rho)_grad times the normalization, with the
// empirical sign tracked explicitly (kEmpiricalAnomalySign).

enum class EstimatorKind { direct, discrepancy };

inline const char* estimator_name(EstimatorKind k) {
    return k == EstimatorKind::direct ? "direct" : "discrepancy";
}

// Sign of [mass(len_rho >= delta) - mass(clen_rho >= delta)] relative to
// (b/2)(rho,rho)_grad, resolved by the brute-force oracle: the rho-length
// cutoff admits MORE loops than the frozen-center cutoff (Jensen gain of
// e^rho along the loop), so the correction is positive.
inline constexpr double kEmpiricalAnomalySign = +1.0;

struct AnomalyEstimate {
    double value = 0.0;     // normalization included
    double std_error = 0.0;
    double delta = 0.0;
    std::int64_t n_samples = 0;
    EstimatorKind estimator = EstimatorKind::direct;
    std::string measure;
    std::string field_id;
    double fallback_rate = 0.0;
    std::uint64_t seed = 0;
};

// normalization * Vol_rho(D) / delta, by quadrature; no sampling.
double clen_mass_exact(const ConformalField& field, const Box& D, double delta,
                       const MeasureSpec& measure, int quad_n = 1024);

struct DirectOptions {
    int loop_resolution = 1024;
    double d_star = kDefaultDStar;
    int workers = 1;
    double max_fallback_rate = 0.10; // refuse above this
    int quad_n = 1024;
};

// Direct estimator: samples x ~ Uniform(D) and l ~ measure, forms
// normalization * area(D) * (alpha^-1 - beta^-1) per sample.  Estimates
// mass(len_rho >= delta) - mass(clen_rho >= delta).  Identically zero per
// sample when rho == 0.  Throws when the alpha fallback rate exceeds
// options.max_fallback_rate (delta too large for the loop diameters).
AnomalyEstimate estimate_anomaly_direct(const ConformalField& field, const Box& D, double delta,
                                        const MeasureSpec& measure, std::int64_t N, Rng rng,
                                        const DirectOptions& options = {});

// Which law the discrepancy estimator uses for the loop center X.  The
// uniform variant (x ~ Lebesgue on D) is the one that reproduces the direct
// estimator; the importance variant weights centers by e^{rho(x)} and is
// kept for comparison.
enum class DiscrepancyWeighting { uniform_center, importance_center };

// Length-discrepancy estimator: with t = beta(x) and Z a point of the loop
// at a uniform node time, averages
// normalization * area(D) * delta^-1 (e^{rho(Z)} - e^{rho(X)}).
AnomalyEstimate estimate_discrepancy(const ConformalField& field, const Box& D, double delta,
                                     const MeasureSpec& measure, std::int64_t N, Rng rng,
                                     DiscrepancyWeighting weighting =
                                         DiscrepancyWeighting::uniform_center,
                                     int loop_resolution = 1024, int workers = 1);

struct MassEstimate {
    double value = 0.0;     // includes the exact tail beyond t_max
    double std_error = 0.0;
    double tail_exact = 0.0;
    std::int64_t n_samples = 0;
};

// Brute-force oracle for mass{cen in D, len_rho >= delta, any len}:
// stratified sampling of t against the t^-2 density on log-uniform strata
// over [delta/Lambda, t_max], plus the exact tail normalization*area/t_max
// where the indicator is identically 1.  Throws if t_max < Lambda * delta.
MassEstimate mass_direct_bruteforce(const ConformalField& field, const Box& D, double delta,
                                    const MeasureSpec& measure, std::int64_t N, double t_max,
                                    Rng rng, int loop_resolution = 1024, int n_strata = 64,
                                    int workers = 1);

// Direct estimator across descending deltas with common random numbers:
// every delta sees the same (x, l) stream, so the sweep is
// monotone-comparable sample by sample.
std::vector<AnomalyEstimate> delta_sweep(const ConformalField& field, const Box& D,
                                         const std::vector<double>& deltas,
                                         const MeasureSpec& measure, std::int64_t N, Rng rng,
                                         const DirectOptions& options = {});

} // namespace la
