#pragma once

#include <cstdint>
#include <vector>

#include "loopanomaly/conformal_field.hpp"
#include "loopanomaly/geometry.hpp"
#include "loopanomaly/loop_space.hpp"
#include "loopanomaly/rng.hpp"

namespace la {

// Flat torus R^2 / (L1 Z x L2 Z): chi = 0, K = 0.  Laplacian eigenvalues
// are 4 pi^2 (m^2/L1^2 + n^2/L2^2); Z(t) = tr e^{t Laplacian}.  Brownian
// motion here is the wrapped planar one (per-coordinate variance t over
// time t), so the bridge of time-length t has heat-kernel diagonal
// Z(t/2)/area: heat-semigroup time is half of Brownian time throughout.
struct TorusSpec {
    double L1 = 1.0;
    double L2 = 1.0;
    double area() const { return L1 * L2; }
};

// Eigenvalues of -Laplacian with |m|,|n| <= m_max, ascending, with
// multiplicity; starts at 0 (constant mode, listed once).
std::vector<double> torus_eigenvalues(const TorusSpec& spec, int m_max);

double heat_trace_eigen(const TorusSpec& spec, double t);   // eigenvalue sum
double heat_trace_poisson(const TorusSpec& spec, double t); // dual lattice sum

// Eigenvalue route for t >= 1, Poisson-summation route below; the two agree
// to 1e-10 relative near the crossover.
double heat_trace(const TorusSpec& spec, double t);

// Z(t) - area/(4 pi t), evaluated without cancellation (the lattice sum
// with the zero translate removed); exponentially small as t -> 0.
double heat_trace_minus_weyl(const TorusSpec& spec, double t);

// Zeta-regularized determinant of the Laplacian (zero mode removed), by
// the Mellin split at t = 1:
// log det' = gamma + area/(4 pi)
//            - int_0^1 (Z - area/(4 pi t)) dt/t - int_1^inf (Z - 1) dt/t,
// with the second integral summed as exponential integrals E1(lambda).
double zeta_determinant(const TorusSpec& spec);

// Brownian-time diagonal p_t(z,z) = Z(t/2)/area (z-independent).
double heat_kernel_diagonal_bm(const TorusSpec& spec, double t);

// Brownian-time transition density p_t(x, x+d) on the torus.
double heat_kernel_bm(const TorusSpec& spec, Vec2 d, double t);

// Itemized right-hand side of the flat-torus determinant identity:
// Vol_rho/(2 pi delta) + log C + gamma + (1/48pi) (rho,rho)_grad
// + log Vol - log Vol_rho - log det'.
struct PaTerms {
    double vol_rho_over_2pi_delta = 0.0;
    double log_C = 0.0;
    double euler_gamma = 0.0;
    double dirichlet_over_48pi = 0.0;
    double log_vol = 0.0;
    double minus_log_vol_rho = 0.0;
    double minus_log_det = 0.0;
    double total() const {
        return vol_rho_over_2pi_delta + log_C + euler_gamma + dirichlet_over_48pi + log_vol +
               minus_log_vol_rho + minus_log_det;
    }
};

PaTerms pa_rhs(const TorusSpec& spec, const ConformalField& field, double delta, double C,
               int quad_n = 1024);

// Exact mass of {delta <= len <= C} for rho == 0:
// integral over [delta, C] of Z(t/2)/t dt.
double torus_flat_loop_mass_quadrature(const TorusSpec& spec, double delta, double C);

// One Brownian loop on the torus of time-length t rooted at `root`:
// a planar bridge plus a lattice-translate drift chosen with the exact
// Gaussian winding weights.  Points are unwrapped plane positions.
struct TorusLoop {
    double t = 0.0;
    Vec2 root;
    int winding1 = 0, winding2 = 0;
    std::vector<Vec2> pts; // n nodes at times k t / n
};

TorusLoop sample_torus_loop(const TorusSpec& spec, double t, Vec2 root, int n, Rng& rng);

Vec2 torus_wrap(const TorusSpec& spec, Vec2 p);

// t * mean over nodes of e^{rho(wrap(p))}.
double torus_len_rho(const TorusSpec& spec, const ConformalField& field, const TorusLoop& loop);

struct TorusMassEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double middle_exact = 0.0;  // window where the indicator is certain
    double edge_weight = 0.0;   // total sampled weight in the two edge windows
    std::int64_t n_samples = 0;
};

// Monte Carlo mass of {delta <= len_rho <= C} under the torus Brownian
// loop measure.  Time-lengths are drawn from the exact density Z(t/2)/t;
// on [Lambda delta, C/Lambda] the indicator is identically 1 and that
// window's weight enters exactly, so only the two edge windows are sampled.
TorusMassEstimate torus_loop_mass(const TorusSpec& spec, const ConformalField& field,
                                  double delta, double C, std::int64_t N, Rng rng,
                                  int base_resolution = 1024, int workers = 1,
                                  int nodes_per_unit_time = 256);

} // namespace la
