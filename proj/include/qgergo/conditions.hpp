#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "qgergo/modes.hpp"
#include "qgergo/noise.hpp"

// Checks on the noise covariance that decide existence and uniqueness of an
// invariant measure for the forced flow:
//
//   (i)   the Hilbert-Schmidt integral  int_0^inf ||S(r) sqrt(Q)||_HS^2 dr
//         is finite (it equals sum_k alpha_k^2 / (2|lambda_k|) for the
//         diagonal semigroup),
//   (ii)  Image S(t) is contained in Image Q_t^{1/2}, where
//         Q_t = int_0^t S(r) Q S(r)* dr,
//   (iii) Q is injective (every alpha_k > 0).
//
// All sums are reported over the truncation, with analytic tail bounds for
// power laws.  Tail bounds use the lattice-count estimate |lambda_k| >=
// 4 pi nu k (every unit cell below a lattice point lies inside the quarter
// disk, so k <= pi (m^2+n^2)/4).

namespace qgergo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Verdict {
    bool pass = false;
    std::string reason;
};

/// Outcome of the mode-amplitude summability test
/// sum_k alpha_k^2 / |lambda_k|^{1-gamma} < infinity.
struct SummabilityReport {
    bool convergent = false;
    std::string method;      ///< "exponent-test", "finite-table", or "zero"
    double partial_sum = 0;  ///< sum over the truncation, actual eigenvalues
    double tail_bound = 0;   ///< analytic bound on the remainder; +inf if divergent
};

/// Decide convergence of sum_k alpha_k^2 / |lambda_k|^{1-gamma}.
///
/// Power laws are decided analytically: with |lambda_k| comparable to k the
/// summand is k^{-2p-(1-gamma)}, which converges iff 2p + (1-gamma) > 1.
/// Finite tables always converge.  Diagnostics report the truncated sum.
inline SummabilityReport check_summability(const NoiseSpec& spec, double nu) {
    spec.validate();
    if (!(nu > 0.0)) throw std::domain_error("check_summability: nu must be > 0");

    SummabilityReport rep;
    const ModeTable table(spec.truncation);
    const double ex = 1.0 - spec.gamma;
    for (std::size_t k = 1; k <= table.size(); ++k) {
        const double a = spec.alpha(k);
        rep.partial_sum += a * a / std::pow(std::abs(table.lambda(k, nu)), ex);
    }

    switch (spec.law) {
    case NoiseSpec::Law::Zero:
        rep.method = "zero";
        rep.convergent = true;
        rep.tail_bound = 0.0;
        break;
    case NoiseSpec::Law::Table:
        rep.method = "finite-table";
        rep.convergent = true;
        rep.tail_bound = 0.0;
        break;
    case NoiseSpec::Law::Power: {
        rep.method = "exponent-test";
        if (spec.c == 0.0) {
            rep.convergent = true;
            rep.tail_bound = 0.0;
            break;
        }
        // summand ~ k^{-s} with s = 2p + 1 - gamma
        const double s = 2.0 * spec.p + 1.0 - spec.gamma;
        rep.convergent = s > 1.0;
        if (rep.convergent) {
            // integral test with |lambda_k| >= 4 pi nu k
            const double kk = static_cast<double>(table.size());
            rep.tail_bound = spec.c * spec.c * std::pow(4.0 * kPi * nu, -ex) *
                             std::pow(kk, 1.0 - s) / (s - 1.0);
        } else {
            rep.tail_bound = kInf;
        }
        break;
    }
    }
    return rep;
}

/// Trace of Q over the truncation plus a power-law tail estimate.
struct TraceReport {
    double truncated = 0;     ///< sum_{k <= K} alpha_k^2
    double tail_estimate = 0; ///< integral-test bound on the remainder
};

inline TraceReport trace_Q(const NoiseSpec& spec) {
    spec.validate();
    TraceReport rep;
    for (std::size_t k = 1; k <= spec.mode_count(); ++k) {
        const double a = spec.alpha(k);
        rep.truncated += a * a;
    }
    if (spec.law == NoiseSpec::Law::Power && spec.c > 0.0) {
        const double kk = static_cast<double>(spec.mode_count());
        rep.tail_estimate = (2.0 * spec.p > 1.0)
                                ? spec.c * spec.c * std::pow(kk, 1.0 - 2.0 * spec.p) /
                                      (2.0 * spec.p - 1.0)
                                : kInf;
    }
    return rep;
}

/// Closed form of int_0^infinity ||S(r) sqrt(Q)||_HS^2 dr over the
/// truncation: sum_k alpha_k^2 / (2 |lambda_k|).
inline double hs_integral(const NoiseSpec& spec, double nu) {
    spec.validate();
    if (!(nu > 0.0)) throw std::domain_error("hs_integral: nu must be > 0");
    const ModeTable table(spec.truncation);
    double s = 0.0;
    for (std::size_t k = 1; k <= table.size(); ++k) {
        const double a = spec.alpha(k);
        s += a * a / (2.0 * std::abs(table.lambda(k, nu)));
    }
    return s;
}

/// Analytic tail bound companion of hs_integral for power laws.
inline double hs_integral_tail_estimate(const NoiseSpec& spec, double nu) {
    spec.validate();
    if (spec.law != NoiseSpec::Law::Power || spec.c == 0.0) return 0.0;
    if (!(spec.p > 0.0)) return kInf;
    const double kk = static_cast<double>(spec.mode_count());
    return spec.c * spec.c / (8.0 * kPi * nu) * std::pow(kk, -2.0 * spec.p) / (2.0 * spec.p);
}

/// Diagonal-ratio test of the inclusion Image S(t) in Image Q_t^{1/2}.
///
/// With Q diagonal, Q_t is diagonal with entries
/// q_{t,k} = alpha_k^2 (1 - e^{2 lambda_k t}) / (2 |lambda_k|) and the
/// inclusion holds iff sup_k e^{lambda_k t} / sqrt(q_{t,k}) < infinity.
/// Over a truncation the sup is a max, so the verdict is: fail if any
/// alpha_k = 0 (that mode is unreachable), otherwise pass if the ratio
/// envelope decays in the tail of the mode ordering.
struct ImageConditionReport {
    bool pass = false;
    double t = 0;
    double max_ratio = 0;
    std::size_t argmax = 0;       ///< linear index attaining the max
    bool tail_decreasing = false; ///< envelope trend over the last half
    std::string reason;
};

inline ImageConditionReport check_image_condition(const NoiseSpec& spec, double nu, double t) {
    spec.validate();
    if (!(t > 0.0)) throw std::domain_error("check_image_condition: t must be > 0");
    if (!(nu > 0.0)) throw std::domain_error("check_image_condition: nu must be > 0");

    ImageConditionReport rep;
    rep.t = t;
    const ModeTable table(spec.truncation);
    const std::size_t kk = table.size();

    std::vector<double> ratio(kk);
    for (std::size_t k = 1; k <= kk; ++k) {
        const double a = spec.alpha(k);
        if (!(a > 0.0)) {
            rep.pass = false;
            std::ostringstream os;
            os << "mode k=" << k << " has alpha=0; Image Q_t^{1/2} misses it";
            rep.reason = os.str();
            return rep;
        }
        const double lam = table.lambda(k, nu);
        const double q = a * a * (1.0 - std::exp(2.0 * lam * t)) / (2.0 * std::abs(lam));
        ratio[k - 1] = std::exp(lam * t) / std::sqrt(q);
        if (ratio[k - 1] > rep.max_ratio) {
            rep.max_ratio = ratio[k - 1];
            rep.argmax = k;
        }
    }

    // Eigenvalue ties make consecutive ratios sawtooth (same lambda, smaller
    // alpha), so compare quarter maxima of the tail instead.
    if (kk < 4) {
        rep.tail_decreasing = true;
    } else {
        const auto quarter_max = [&](std::size_t lo, std::size_t hi) {
            return *std::max_element(ratio.begin() + lo, ratio.begin() + hi);
        };
        const double q3 = quarter_max(kk / 2, 3 * kk / 4);
        const double q4 = quarter_max(3 * kk / 4, kk);
        rep.tail_decreasing = q4 <= q3;
    }

    rep.pass = rep.tail_decreasing;
    rep.reason = rep.pass ? "all modes forced; ratio envelope decays"
                          : "ratio envelope grows along the mode ordering";
    return rep;
}

/// Aggregated hypothesis report for uniqueness and ergodicity of the
/// invariant measure.
struct ConditionReport {
    SummabilityReport summability; ///< amplitude admissibility (informative)
    TraceReport trace;
    double hs_value = 0;
    double hs_tail_estimate = 0;
    Verdict hs_finite;                        ///< condition (i), over the truncation
    std::vector<ImageConditionReport> image;  ///< condition (ii) at several t
    Verdict injectivity;                      ///< condition (iii)
    bool admissible = false;                  ///< (i) and (ii) and (iii)
};

/// Evaluate conditions (i)-(iii) for the truncated system.  The image
/// condition is sampled at t in {0.1, 1, 10}; the inclusion must hold for
/// each t, and three decades are a pragmatic sweep of the relevant scales.
inline ConditionReport evaluate_conditions(const NoiseSpec& spec, double nu) {
    spec.validate();
    ConditionReport rep;
    rep.summability = check_summability(spec, nu);
    rep.trace = trace_Q(spec);
    rep.hs_value = hs_integral(spec, nu);
    rep.hs_tail_estimate = hs_integral_tail_estimate(spec, nu);

    rep.hs_finite.pass =
        std::isfinite(rep.hs_value) && std::isfinite(rep.hs_tail_estimate);
    rep.hs_finite.reason =
        rep.hs_finite.pass
            ? "Hilbert-Schmidt integral is finite (truncation plus tail bound)"
            : "Hilbert-Schmidt integral diverges beyond the truncation";

    bool image_ok = true;
    for (double t : {0.1, 1.0, 10.0}) {
        rep.image.push_back(check_image_condition(spec, nu, t));
        image_ok = image_ok && rep.image.back().pass;
    }

    rep.injectivity.pass = spec.all_modes_positive();
    rep.injectivity.reason = rep.injectivity.pass
                                 ? "every mode amplitude is positive"
                                 : "some alpha_k = 0, so ker Q != {0}";

    rep.admissible = rep.hs_finite.pass && image_ok && rep.injectivity.pass;
    return rep;
}

/// Name of the first failing condition, for error categories: "(i)",
/// "(ii)", "(iii)", or "" when admissible.  Injectivity is reported before
/// the image condition: a kernel in Q breaks the inclusion in a trivial
/// way, so (iii) is the root cause whenever both fail.
inline std::string first_failed_condition(const ConditionReport& rep) {
    if (!rep.hs_finite.pass) return "(i)";
    if (!rep.injectivity.pass) return "(iii)";
    for (const auto& img : rep.image)
        if (!img.pass) return "(ii)";
    return "";
}

/// Human-readable rendering used by the CLI `check` subcommand.
inline std::string format_condition_report(const ConditionReport& rep) {
    std::ostringstream os;
    os.precision(12);
    os << "noise admissibility"
       << "\n  summability (" << rep.summability.method << "): "
       << (rep.summability.convergent ? "convergent" : "divergent")
       << "  partial_sum=" << rep.summability.partial_sum
       << "  tail_bound=" << rep.summability.tail_bound
       << "\n  trace Q: " << rep.trace.truncated
       << " (+tail<=" << rep.trace.tail_estimate << ")"
       << "\ncondition (i)  HS integral: " << (rep.hs_finite.pass ? "PASS" : "FAIL")
       << "  value=" << rep.hs_value << " (+tail<=" << rep.hs_tail_estimate << ")"
       << "\ncondition (ii) image inclusion:";
    for (const auto& img : rep.image) {
        os << "\n  t=" << img.t << ": " << (img.pass ? "PASS" : "FAIL")
           << "  max_ratio=" << img.max_ratio << " at k=" << img.argmax
           << "  (" << img.reason << ")";
    }
    os << "\ncondition (iii) injectivity: " << (rep.injectivity.pass ? "PASS" : "FAIL")
       << "  (" << rep.injectivity.reason << ")"
       << "\noverall: " << (rep.admissible ? "admissible" : "inadmissible") << "\n";
    return os.str();
}

} // namespace qgergo
