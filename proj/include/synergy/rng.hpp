#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace synergy {

// Reproducibility note: the mt19937_64 output sequence is pinned by the
// standard, but the standard *distributions* are not. Regression constants
// must match across platforms, so every variate here is derived from raw
// engine output by hand.

inline double uniform01(std::mt19937_64& g) {
    // 53 random mantissa bits -> [0, 1)
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = g();
    while (v >= limit) v = g();
    return v % n;
}

inline double standard_normal(std::mt19937_64& g) {
    // Box-Muller; discards the second variate for simplicity.
    double u1 = uniform01(g);
    while (u1 <= 0.0) u1 = uniform01(g);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
inline double gamma_variate(std::mt19937_64& g, double shape) {
    if (shape < 1.0) {
        const double u = uniform01(g);
        return gamma_variate(g, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0, v = 0.0;
        do {
            x = standard_normal(g);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(g);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

// Symmetric Dirichlet(alpha) over k cells. alpha = 1 is uniform on the
// simplex; that case reduces to normalized exponentials.
inline std::vector<double> dirichlet(std::mt19937_64& g, std::size_t k, double alpha = 1.0) {
    std::vector<double> w(k, 0.0);
    double total = 0.0;
    for (auto& x : w) {
        x = (alpha == 1.0) ? -std::log1p(-uniform01(g)) : gamma_variate(g, alpha);
        total += x;
    }
    if (total <= 0.0) return std::vector<double>(k, 1.0 / static_cast<double>(k));
    for (auto& x : w) x /= total;
    return w;
}

}  // namespace synergy
