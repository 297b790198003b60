#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace la {

// Welford accumulator for one MC stream; resolves tiny variances without
// cancellation.  Merging order must be fixed by the caller (see
// parallel.hpp) so that results do not depend on scheduling.
struct Accumulator {
    double mean_ = 0.0;
    double m2_ = 0.0;
    std::int64_t count = 0;

    void add(double x) {
        ++count;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(count);
        m2_ += d * (x - mean_);
    }
    void merge(const Accumulator& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
        const double d = o.mean_ - mean_;
        mean_ += d * nb / (na + nb);
        m2_ += o.m2_ + d * d * na * nb / (na + nb);
        count += o.count;
    }
    double mean() const { return mean_; }
    double variance() const {
        return count > 1 ? std::max(0.0, m2_ / static_cast<double>(count - 1)) : 0.0;
    }
    double std_error() const {
        return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }
};

// Two-sample Kolmogorov-Smirnov statistic; inputs are sorted in place.
inline double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size(), m = b.size();
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < n && j < m) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / n;
        const double fb = static_cast<double>(j) / m;
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

// Critical value at significance alpha for the two-sample KS statistic.
inline double ks_critical(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - lo;
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double d = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / d;
}

} // namespace la
