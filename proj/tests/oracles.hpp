#pragma once

// Test-side oracles, independent of the implementation paths they check.

#include <cmath>
#include <functional>

#include "loopanomaly/special.hpp"

namespace oracles {

// 1-D adaptive-ish radial quadrature: integral over the disk r in [0, R] of
// f(r) * 2 pi r dr, by composite Gauss-Legendre with many panels.
inline double radial_integral(const std::function<double(double)>& f, double R,
                              int panels = 256) {
    return la::integrate_panels([&](double r) { return f(r) * la::kTwoPi * r; }, 0.0, R,
                                static_cast<std::size_t>(panels));
}

// circular average (1/2pi) integral of g(theta) dtheta at high resolution;
// the trapezoid rule converges spectrally for periodic integrands
inline double circular_average(const std::function<double(double)>& g, int n = 65536) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += g(la::kTwoPi * (k + 0.37) / n);
    return s / n;
}

// Dedekind eta on the imaginary axis: eta(i y) via the q-product, with the
// modular flip eta(i/y) = sqrt(y) eta(iy) used to keep q small.
inline double dedekind_eta_imag(double y) {
    if (y < 1.0) return dedekind_eta_imag(1.0 / y) / std::sqrt(y);
    const double q = std::exp(-la::kTwoPi * y); // nome squared convention: q = e^{2 pi i tau}
    double prod = 1.0;
    double qn = 1.0;
    for (int n = 1; n <= 64; ++n) {
        qn *= q;
        const double factor = 1.0 - qn;
        prod *= factor;
        if (qn < 1e-19) break;
    }
    return std::exp(-la::kPi * y / 12.0) * prod;
}

// Kronecker-limit route to the zeta determinant of the flat torus
// R^2/(L1 Z x L2 Z): det' = area * tau2 * |eta(i tau2)|^4 with
// tau2 = L2/L1.  Independent of the heat-trace Mellin route.
inline double det_zeta_torus_oracle(double L1, double L2) {
    const double tau2 = L2 / L1;
    const double eta = dedekind_eta_imag(tau2);
    return L1 * L2 * tau2 * (eta * eta) * (eta * eta);
}

} // namespace oracles
