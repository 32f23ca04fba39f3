#pragma once
// Small numeric utilities shared across the library: deterministic reductions,
// a seeded PRNG, angle helpers and least-squares fitting.
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace higgsflow {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Deterministic pairwise (binary-tree) summation.  Used for every physical
// reduction so that results do not depend on accumulation order or chunking,
// and carry ~O(log n) rounding error instead of O(n).
inline double pairwise_sum(const double* p, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(p, half) + pairwise_sum(p + half, n - half);
}

inline double pairwise_sum(std::span<const double> v) { return pairwise_sum(v.data(), v.size()); }
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// splitmix64: tiny, seedable, reproducible across platforms.  All randomized
// tests and probe-point selections draw from this generator only.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  private:
    std::uint64_t state_;
};

// Shortest signed representative of d modulo L, in [-L/2, L/2).
inline double wrap_delta(double d, double L) {
    double w = d - L * std::round(d / L);
    if (w >= 0.5 * L) w -= L;   // round-half-to-even edge case
    return w;
}

// Principal value of an angle increment, in (-pi, pi].
inline double principal_angle(double s) {
    double w = s - two_pi * std::round(s / two_pi);
    if (w <= -pi) w += two_pi;
    return w;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
};

// Ordinary least squares y ~ intercept + slope * x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    LineFit out;
    const std::size_t n = std::min(x.size(), y.size());
    out.count = n;
    if (n < 2) return out;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) return out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return out;
}

}  // namespace higgsflow
