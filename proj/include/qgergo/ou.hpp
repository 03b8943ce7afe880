#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qgergo/field.hpp"
#include "qgergo/modes.hpp"
#include "qgergo/noise.hpp"
#include "qgergo/rng.hpp"

// Ornstein-Uhlenbeck stochastic convolution
//   Z(t) = int_0^t S(t-r) sqrt(Q) dW(r),
// mode-wise dz_k = lambda_k z_k dt + alpha_k dw_k.  The transition over a
// step of length dt is sampled exactly from the Gaussian law
//   z_k(t+dt) = e^{lambda_k dt} z_k(t) + eta_k,
//   eta_k ~ N(0, alpha_k^2 (1 - e^{2 lambda_k dt}) / (2 |lambda_k|)),
// so there is no time-discretization bias at any step size.

namespace qgergo {

struct OuState {
    SpectralField z;
    double t = 0;
    std::uint64_t step = 0; ///< counts transitions taken; indexes the noise stream

    explicit OuState(int truncation) : z(truncation) {}
};

/// Standard deviation of the exact transition noise for one mode.
inline double transition_sigma(double alpha, double lambda, double dt) {
    return alpha * std::sqrt((1.0 - std::exp(2.0 * lambda * dt)) / (2.0 * std::abs(lambda)));
}

/// Draw the vector of transition-noise increments for a step.  Deterministic
/// in (key, step): mode k consumes the counter block {step, k, 0, 0}, so
/// trajectories can be replayed or resumed mid-stream.  The output is laid
/// out m-major like SpectralField storage, not in linear-index order.
inline void sample_transition_noise(const NoiseSpec& spec, const ModeTable& table, double nu,
                                    double dt, RngKey key, std::uint64_t step,
                                    std::vector<double>& out) {
    const std::size_t kk = table.size();
    out.resize(kk);
    for (std::size_t k = 1; k <= kk; ++k) {
        const std::size_t slot = table.storage_index(k);
        const double a = spec.alpha(k);
        if (a == 0.0) {
            out[slot] = 0.0;
            continue;
        }
        const double xi = standard_normal(key, k, step);
        out[slot] = transition_sigma(a, table.lambda(k, nu), dt) * xi;
    }
}

/// Advance the stochastic convolution by dt with one exact transition.
inline void ou_step(OuState& state, const NoiseSpec& spec, const ModeTable& table, double nu,
                    double dt, RngKey key) {
    if (!(dt > 0.0)) throw std::domain_error("ou_step: dt must be > 0");
    if (table.truncation() != state.z.truncation())
        throw std::invalid_argument("ou_step: truncation mismatch");

    std::vector<double> eta;
    sample_transition_noise(spec, table, nu, dt, key, state.step, eta);

    double* z = state.z.data();
    for (std::size_t k = 1; k <= table.size(); ++k) {
        const std::size_t slot = table.storage_index(k);
        const double decay = std::exp(table.lambda(k, nu) * dt);
        z[slot] = decay * z[slot] + eta[slot];
    }
    state.t += dt;
    state.step += 1;
}

/// Variance of the stationary law of mode k: alpha_k^2 / (2 |lambda_k|).
inline double stationary_variance(const NoiseSpec& spec, const ModeTable& table, double nu,
                                  std::size_t k) {
    const double a = spec.alpha(k);
    return a * a / (2.0 * std::abs(table.lambda(k, nu)));
}

/// Monte Carlo estimate of sup_{t <= horizon} E ||Z(t)||^2, sampling the
/// mean square over `paths` independent trajectories at every step.  The
/// estimate is only meaningful with a real ensemble.
inline double sup_mean_square_z(const NoiseSpec& spec, double nu, double dt, double horizon,
                                std::size_t paths, std::uint64_t seed) {
    spec.validate();
    if (paths < 100)
        throw std::invalid_argument("sup_mean_square_z: need at least 100 paths");
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw std::domain_error("sup_mean_square_z: dt and horizon must be > 0");

    const ModeTable table(spec.truncation);
    std::vector<OuState> states;
    states.reserve(paths);
    for (std::size_t p = 0; p < paths; ++p) states.emplace_back(spec.truncation);

    double sup = 0.0;
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
    for (std::size_t s = 0; s < steps; ++s) {
        double mean_sq = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            ou_step(states[p], spec, table, nu, dt, RngKey{seed, p});
            mean_sq += states[p].z.norm_sq();
        }
        sup = std::max(sup, mean_sq / static_cast<double>(paths));
    }
    return sup;
}

} // namespace qgergo
