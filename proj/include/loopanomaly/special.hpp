#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace la {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240;

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t n) : nodes(n), weights(n) {
        for (std::size_t i = 0; i < n; ++i) {
            double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
            double p0 = 0, p1 = 0;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
                }
                const double dp = n * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            p1 = 0.0;
            double p = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p;
                p = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
            }
            const double dp = n * (x * p - p1) / (x * x - 1.0);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    template <typename F>
    double integrate(F&& f, double a, double b) const {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(mid + half * nodes[i]);
        return s * half;
    }
};

inline const GaussLegendre& gl32() {
    static const GaussLegendre rule(32);
    return rule;
}

// Composite Gauss-Legendre over n_panels equal panels.
template <typename F>
double integrate_panels(F&& f, double a, double b, std::size_t n_panels) {
    const auto& rule = gl32();
    double s = 0.0;
    for (std::size_t p = 0; p < n_panels; ++p) {
        const double pa = a + (b - a) * static_cast<double>(p) / n_panels;
        const double pb = a + (b - a) * static_cast<double>(p + 1) / n_panels;
        s += rule.integrate(f, pa, pb);
    }
    return s;
}

// Exponential integral E1(x) for x > 0: series for x <= 1, continued
// fraction otherwise.
inline double exp_integral_e1(double x) {
    if (x <= 0.0) return std::numeric_limits<double>::infinity();
    if (x <= 1.0) {
        double sum = -kEulerGamma - std::log(x);
        double term = 1.0;
        for (int k = 1; k <= 40; ++k) {
            term *= -x / k;
            const double add = -term / k;
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    // Lentz continued fraction: E1(x) = e^{-x} / (x + 1/(1 + 1/(x + 2/(1 + ...))))
    double b = x + 1.0;
    double c = 1e308;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

} // namespace la
