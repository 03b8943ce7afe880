#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

// Statistical reductions for the ergodicity experiments: Cesaro time
// averages along a trajectory, ensemble means with standard errors, and the
// nonparametric machinery (histograms, quantiles, two-sample
// Kolmogorov-Smirnov) used to compare empirical laws.

namespace qgergo {

/// Trapezoidal average of a sampled observable over [burn_in, T], divided
/// by the window length.  The grid must be strictly increasing; a burn-in
/// falling between grid points enters through linear interpolation.
inline double time_average(const std::vector<double>& t, const std::vector<double>& g,
                           double burn_in) {
    if (t.size() != g.size()) throw std::invalid_argument("time_average: size mismatch");
    if (t.size() < 2) throw std::invalid_argument("time_average: need at least two samples");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw std::invalid_argument("time_average: grid not increasing");

    const double start = std::max(burn_in, t.front());
    const double end = t.back();
    if (!(start < end)) throw std::invalid_argument("time_average: empty averaging window");

    // first grid point at or past the window start
    std::size_t i0 = 0;
    while (t[i0] < start) ++i0;

    double integral = 0.0;
    if (i0 > 0 && t[i0] > start) {
        // partial panel from start to t[i0]
        const double w = (start - t[i0 - 1]) / (t[i0] - t[i0 - 1]);
        const double g_start = g[i0 - 1] + w * (g[i0] - g[i0 - 1]);
        integral += 0.5 * (g_start + g[i0]) * (t[i0] - start);
    }
    for (std::size_t i = i0 + 1; i < t.size(); ++i)
        integral += 0.5 * (g[i - 1] + g[i]) * (t[i] - t[i - 1]);
    return integral / (end - start);
}

struct MeanStderr {
    double mean = 0;
    double std_error = 0;
    std::size_t n = 0;
};

/// Sample mean and standard error across ensemble members.
inline MeanStderr ensemble_average(const std::vector<double>& values) {
    if (values.size() < 2)
        throw std::invalid_argument("ensemble_average: need at least two members");
    MeanStderr out;
    out.n = values.size();
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(out.n);
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(out.n - 1) / static_cast<double>(out.n));
    return out;
}

/// sqrt(se_a^2 + se_b^2), the scale for comparing two independent means.
inline double pooled_stderr(double se_a, double se_b) {
    return std::sqrt(se_a * se_a + se_b * se_b);
}

inline double median(std::vector<double> x) {
    if (x.empty()) throw std::invalid_argument("median: empty sample");
    const std::size_t mid = x.size() / 2;
    std::nth_element(x.begin(), x.begin() + mid, x.end());
    double hi = x[mid];
    if (x.size() % 2 == 1) return hi;
    std::nth_element(x.begin(), x.begin() + mid - 1, x.begin() + mid);
    return 0.5 * (x[mid - 1] + hi);
}

struct KsResult {
    double statistic = 0; ///< sup |F_a - F_b|
    double critical = 0;  ///< asymptotic threshold at the requested level
    double level = 0;
    bool pass = false; ///< statistic below critical: same-law hypothesis stands
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic critical value
/// c(level) sqrt((n+m)/(nm)), c(level) = sqrt(-ln(level/2)/2).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double level = 0.01) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("ks_two_sample: level must lie in (0, 1)");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }

    KsResult out;
    out.statistic = d;
    out.level = level;
    out.critical = std::sqrt(-0.5 * std::log(level / 2.0)) * std::sqrt((na + nb) / (na * nb));
    out.pass = d < out.critical;
    return out;
}

struct Histogram {
    double lo = 0;
    double hi = 0;
    std::vector<std::size_t> counts;
    std::vector<double> mass; ///< per-bin probability; sums to 1
};

/// Probability histogram over [lo, hi]; values outside are clamped into the
/// edge bins so the total mass is exactly 1.
inline Histogram histogram(const std::vector<double>& x, std::size_t bins, double lo, double hi) {
    if (x.empty()) throw std::invalid_argument("histogram: empty sample");
    if (bins == 0) throw std::invalid_argument("histogram: need at least one bin");
    if (!(hi > lo)) throw std::invalid_argument("histogram: hi must exceed lo");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0);
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (double v : x) {
        auto b = static_cast<long long>((v - lo) * scale);
        b = std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    h.mass.resize(bins);
    for (std::size_t b = 0; b < bins; ++b)
        h.mass[b] = static_cast<double>(h.counts[b]) / static_cast<double>(x.size());
    return h;
}

/// Histogram spanning the sample range.
inline Histogram histogram(const std::vector<double>& x, std::size_t bins) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    double a = *lo, b = *hi;
    if (a == b) { // degenerate sample: widen artificially
        a -= 0.5;
        b += 0.5;
    }
    return histogram(x, bins, a, b);
}

} // namespace qgergo
