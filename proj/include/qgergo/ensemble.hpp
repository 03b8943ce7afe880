#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qgergo/integrator.hpp"

// Ensembles of independent trajectories.  Every member is a deterministic
// function of (seed, member id), so any worker schedule produces the same
// ensemble; members are dispatched to a thread pool through an atomic
// ticket counter.

namespace qgergo {

struct InitialCondition {
    enum class Kind { Zero, SingleMode, Random };

    Kind kind = Kind::Zero;
    int mode_m = 1;
    int mode_n = 1;
    double amplitude = 1.0;     ///< single-mode coefficient
    double rng_amplitude = 1.0; ///< scale of random draws

    static InitialCondition zero() { return {}; }

    static InitialCondition single_mode(int m, int n, double amplitude) {
        InitialCondition ic;
        ic.kind = Kind::SingleMode;
        ic.mode_m = m;
        ic.mode_n = n;
        ic.amplitude = amplitude;
        return ic;
    }

    static InitialCondition random(double rng_amplitude) {
        InitialCondition ic;
        ic.kind = Kind::Random;
        ic.rng_amplitude = rng_amplitude;
        return ic;
    }
};

/// Materialize an initial vorticity field.  Random fields are keyed by
/// (seed, ic_index) in the reserved initial-condition stream: every member
/// of a group starts from the same point of state space, and distinct
/// groups get independent draws.  Coefficients decay like 1/(m^2+n^2) so a
/// random start is smooth rather than a rough high-mode excitation.
inline SpectralField make_initial_field(const InitialCondition& ic, const ModeTable& table,
                                        std::uint64_t seed, std::uint64_t ic_index) {
    SpectralField f(table.truncation());
    switch (ic.kind) {
    case InitialCondition::Kind::Zero:
        break;
    case InitialCondition::Kind::SingleMode: {
        const int nt = table.truncation();
        if (ic.mode_m < 1 || ic.mode_m > nt || ic.mode_n < 1 || ic.mode_n > nt)
            throw std::invalid_argument("make_initial_field: mode outside truncation");
        f.at(ic.mode_m, ic.mode_n) = ic.amplitude;
        break;
    }
    case InitialCondition::Kind::Random: {
        const RngKey key{seed, ic_index};
        double* c = f.data();
        for (std::size_t k = 1; k <= table.size(); ++k)
            c[table.storage_index(k)] = ic.rng_amplitude *
                                        standard_normal(key, k, kStreamInitialCondition) /
                                        table.wavenumber_sq(k);
        break;
    }
    }
    return f;
}

struct SimulateOptions {
    double t_end = 1.0;
    std::uint64_t snapshot_every = 100; ///< recording cadence in steps
    std::vector<std::size_t> slice_modes{1};
    std::uint64_t checkpoint_every = 0; ///< 0 = no intermediate checkpoints
    /// Called with (state, member) whenever the step count hits a multiple of
    /// checkpoint_every.  Runs on the worker thread; must be safe to call
    /// concurrently for distinct members.
    std::function<void(const FlowState&, std::size_t)> on_checkpoint;
};

/// Observable history of one member at the snapshot cadence, plus the final
/// state for checkpointing.
struct MemberSeries {
    std::size_t member = 0;
    std::size_t group = 0; ///< initial-condition group
    std::vector<double> t;
    std::vector<double> enstrophy;
    std::vector<double> energy;
    std::vector<std::vector<double>> slice;
    FlowState final_state{1};
};

/// Run one member from `state` (usually fresh, possibly a checkpoint) to
/// t_end.  Snapshots land exactly on absolute step multiples of
/// snapshot_every — nothing else is recorded — so a trajectory resumed from
/// any checkpoint records at the same times as an uninterrupted one.
inline MemberSeries simulate_member(Integrator& integ, FlowState state, std::size_t member,
                                    std::size_t group, std::uint64_t seed,
                                    const SimulateOptions& opt) {
    const double dt = integ.params().dt;
    const auto target = static_cast<std::uint64_t>(std::llround(opt.t_end / dt));
    if (target < state.step)
        throw std::invalid_argument("simulate_member: t_end earlier than state");
    if (opt.snapshot_every == 0)
        throw std::invalid_argument("simulate_member: snapshot_every must be positive");

    MemberSeries out;
    out.member = member;
    out.group = group;
    const RngKey key{seed, member};

    const auto record = [&] {
        const Observables obs = observables(state.omega, integ.table(), opt.slice_modes);
        out.t.push_back(state.t);
        out.enstrophy.push_back(obs.enstrophy);
        out.energy.push_back(obs.energy);
        out.slice.push_back(obs.slice);
    };

    if (state.step % opt.snapshot_every == 0) record();
    while (state.step < target) {
        integ.step(state, key);
        if (state.step % opt.snapshot_every == 0) record();
        if (opt.checkpoint_every != 0 && opt.on_checkpoint &&
            state.step % opt.checkpoint_every == 0)
            opt.on_checkpoint(state, member);
    }
    out.final_state = std::move(state);
    return out;
}

/// Failure of one ensemble member, tagged with the member id so callers can
/// report which trajectory went bad.
class MemberFailure : public std::runtime_error {
public:
    MemberFailure(std::size_t member, const std::string& what, bool instability)
        : std::runtime_error("member " + std::to_string(member) + ": " + what),
          member_(member),
          instability_(instability) {}

    std::size_t member() const { return member_; }
    bool instability() const { return instability_; }

private:
    std::size_t member_;
    bool instability_;
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Simulate members_per_group trajectories from each initial field.  Member
/// ids are global (group g owns [g*M, (g+1)*M)) and key the noise streams.
/// Results come back ordered by member id regardless of scheduling.
inline std::vector<MemberSeries> run_ensemble(const ModelParams& params, const NoiseSpec& noise,
                                              const std::vector<SpectralField>& group_ics,
                                              std::size_t members_per_group, std::uint64_t seed,
                                              const SimulateOptions& opt, unsigned threads = 0) {
    if (group_ics.empty()) throw std::invalid_argument("run_ensemble: no initial conditions");
    if (members_per_group == 0) throw std::invalid_argument("run_ensemble: empty ensemble");
    for (const auto& ic : group_ics)
        if (ic.truncation() != params.truncation)
            throw std::invalid_argument("run_ensemble: initial-condition truncation mismatch");

    const std::size_t total = group_ics.size() * members_per_group;
    std::vector<std::optional<MemberSeries>> slots(total);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex err_mu;
    std::exception_ptr first_error;

    const auto worker = [&] {
        Integrator integ(params, noise);
        while (!abort.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) break;
            const std::size_t group = i / members_per_group;
            try {
                FlowState st(params.truncation);
                st.omega = group_ics[group];
                slots[i] = simulate_member(integ, std::move(st), i, group, seed, opt);
            } catch (const InstabilityError& e) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!first_error)
                    first_error = std::make_exception_ptr(MemberFailure(i, e.what(), true));
                abort.store(true, std::memory_order_relaxed);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!first_error)
                    first_error = std::make_exception_ptr(MemberFailure(i, e.what(), false));
                abort.store(true, std::memory_order_relaxed);
            }
        }
    };

    const unsigned nthreads =
        static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), total));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned w = 0; w < nthreads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    if (first_error) std::rethrow_exception(first_error);

    std::vector<MemberSeries> out;
    out.reserve(total);
    for (auto& slot : slots) out.push_back(std::move(*slot));
    return out;
}

} // namespace qgergo
