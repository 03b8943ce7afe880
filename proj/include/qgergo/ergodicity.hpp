#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgergo/conditions.hpp"
#include "qgergo/ensemble.hpp"
#include "qgergo/statistics.hpp"

// The ergodicity laboratory: runs ensembles from two distinct initial
// conditions and measures whether long-time averages along trajectories
// agree with ensemble averages over the (empirical) invariant law, whether
// the two starting points become statistically indistinguishable, and
// whether the second moment of the vorticity stays bounded.
//
// Conventions: time averages run over [burn_in, T]; the ensemble side of
// the comparison uses the terminal window [T/2, T], so both sides estimate
// the same stationary quantity without assuming the run starts stationary.
// Tolerances are statistical (3 pooled standard errors; two-sample
// Kolmogorov-Smirnov at level 0.01).

namespace qgergo {

/// Noise rejected by the uniqueness/ergodicity hypotheses.  `condition()`
/// names the first failing one: "(i)", "(ii)" or "(iii)".
class AdmissibilityError : public std::runtime_error {
public:
    AdmissibilityError(std::string condition, const std::string& what)
        : std::runtime_error(what), condition_(std::move(condition)) {}

    const std::string& condition() const { return condition_; }

private:
    std::string condition_;
};

struct LabConfig {
    ModelParams params;
    NoiseSpec noise;
    InitialCondition ic_a; ///< group 0 start
    InitialCondition ic_b; ///< group 1 start, must differ from ic_a
    std::size_t members = 2; ///< trajectories per group
    double t_end = 1.0;
    double burn_in = 0.2;
    std::uint64_t seed = 0;
    std::uint64_t snapshot_every = 100;
    unsigned threads = 0;
    bool force = false; ///< run even when the noise is inadmissible
    std::vector<std::size_t> slice_modes{1};
    std::uint64_t checkpoint_every = 0; ///< forwarded to the per-member simulation
    std::function<void(const FlowState&, std::size_t)> on_checkpoint;
};

struct GroupCurve {
    std::vector<double> mean;
    std::vector<double> std_error;
};

/// Ergodicity diagnostics of one observable g.
struct ObservableReport {
    std::string name;
    std::array<std::vector<double>, 2> member_time_avg; ///< per member, [burn_in, T]
    std::array<MeanStderr, 2> time_avg;                 ///< across members
    std::array<MeanStderr, 2> terminal_avg;             ///< terminal-window means
    std::array<double, 2> birkhoff_discrepancy{};
    std::array<double, 2> birkhoff_tolerance{}; ///< 3 pooled standard errors
    bool birkhoff_pass = false;                 ///< both groups within tolerance
    double cross_ic_discrepancy = 0;
    double cross_ic_tolerance = 0;
    bool cross_ic_pass = false;
    KsResult ks; ///< terminal samples, group 0 vs group 1
    std::array<Histogram, 2> terminal_hist;
    std::array<GroupCurve, 2> ensemble_curve;            ///< per snapshot time
    std::array<std::vector<double>, 2> running_time_avg; ///< vs times_running
};

/// Boundedness diagnostics of the ensemble-mean enstrophy.
struct MomentTrace {
    std::vector<double> mean;         ///< ensemble mean per snapshot time
    std::vector<double> running_mean; ///< cumulative average of the above
    double sup = 0;
    double stabilization_ratio = 0; ///< 2nd-half max/mean of running_mean
    bool bounded = false;           ///< stabilization_ratio < 1.2
};

struct ErgodicReport {
    ConditionReport conditions;
    bool degenerate = false; ///< zero covariance: invariant law collapses to 0
    std::size_t members_per_group = 0;
    std::vector<double> times;         ///< snapshot grid
    std::vector<double> times_running; ///< grid of the running-average curves
    std::vector<ObservableReport> observables;
    std::array<MomentTrace, 2> moments; ///< per group
    MomentTrace moments_pooled;
    double indicator_threshold = 0; ///< pooled terminal median of enstrophy
};

namespace detail {

/// First grid index strictly past `start`.
inline std::size_t first_index_after(const std::vector<double>& t, double start) {
    std::size_t i = 0;
    while (i < t.size() && t[i] <= start) ++i;
    return i;
}

/// Running Cesaro average from burn_in, one value per grid point past it.
inline void running_time_average(const std::vector<double>& t, const std::vector<double>& g,
                                 double burn_in, std::vector<double>& out) {
    out.clear();
    const double start = std::max(burn_in, t.front());
    const std::size_t i0 = first_index_after(t, start);
    if (i0 == 0 || i0 >= t.size()) return;
    const double w = (start - t[i0 - 1]) / (t[i0] - t[i0 - 1]);
    double prev_g = g[i0 - 1] + w * (g[i0] - g[i0 - 1]);
    double prev_t = start;
    double integral = 0.0;
    for (std::size_t i = i0; i < t.size(); ++i) {
        integral += 0.5 * (prev_g + g[i]) * (t[i] - prev_t);
        out.push_back(integral / (t[i] - start));
        prev_t = t[i];
        prev_g = g[i];
    }
}

inline ObservableReport reduce_observable(const std::string& name,
                                          const std::vector<double>& times,
                                          const std::array<std::vector<std::vector<double>>, 2>& series,
                                          double burn_in, double t_half) {
    ObservableReport rep;
    rep.name = name;

    const std::size_t w0 = first_index_after(times, t_half - 1e-9);
    std::array<std::vector<double>, 2> pools;
    std::vector<double> scratch;

    for (int g = 0; g < 2; ++g) {
        const auto& grp = series[g];
        std::vector<double> terminal;
        std::vector<double> running_sum;
        for (const auto& s : grp) {
            rep.member_time_avg[g].push_back(time_average(times, s, burn_in));
            terminal.push_back(time_average(times, s, t_half));
            for (std::size_t i = w0; i < times.size(); ++i) pools[g].push_back(s[i]);
            running_time_average(times, s, burn_in, scratch);
            if (running_sum.empty()) running_sum.assign(scratch.size(), 0.0);
            for (std::size_t i = 0; i < scratch.size(); ++i) running_sum[i] += scratch[i];
        }
        rep.time_avg[g] = ensemble_average(rep.member_time_avg[g]);
        rep.terminal_avg[g] = ensemble_average(terminal);
        rep.birkhoff_discrepancy[g] = std::abs(rep.time_avg[g].mean - rep.terminal_avg[g].mean);
        rep.birkhoff_tolerance[g] =
            3.0 * pooled_stderr(rep.time_avg[g].std_error, rep.terminal_avg[g].std_error);

        const double inv_m = 1.0 / static_cast<double>(grp.size());
        for (double& v : running_sum) v *= inv_m;
        rep.running_time_avg[g] = std::move(running_sum);

        std::vector<double> at_time(grp.size());
        for (std::size_t i = 0; i < times.size(); ++i) {
            for (std::size_t m = 0; m < grp.size(); ++m) at_time[m] = grp[m][i];
            const MeanStderr ms = ensemble_average(at_time);
            rep.ensemble_curve[g].mean.push_back(ms.mean);
            rep.ensemble_curve[g].std_error.push_back(ms.std_error);
        }
    }

    rep.birkhoff_pass = rep.birkhoff_discrepancy[0] <= rep.birkhoff_tolerance[0] &&
                        rep.birkhoff_discrepancy[1] <= rep.birkhoff_tolerance[1];

    rep.cross_ic_discrepancy = std::abs(rep.terminal_avg[0].mean - rep.terminal_avg[1].mean);
    rep.cross_ic_tolerance =
        3.0 * pooled_stderr(rep.terminal_avg[0].std_error, rep.terminal_avg[1].std_error);
    rep.cross_ic_pass = rep.cross_ic_discrepancy <= rep.cross_ic_tolerance;

    double lo = std::min(*std::min_element(pools[0].begin(), pools[0].end()),
                         *std::min_element(pools[1].begin(), pools[1].end()));
    double hi = std::max(*std::max_element(pools[0].begin(), pools[0].end()),
                         *std::max_element(pools[1].begin(), pools[1].end()));
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    rep.terminal_hist[0] = histogram(pools[0], 40, lo, hi);
    rep.terminal_hist[1] = histogram(pools[1], 40, lo, hi);
    rep.ks = ks_two_sample(pools[0], pools[1], 0.01);
    return rep;
}

inline MomentTrace moment_trace(const std::vector<double>& times,
                                const std::vector<const std::vector<double>*>& enstrophy,
                                double t_half) {
    MomentTrace tr;
    const std::size_t nt = times.size();
    tr.mean.assign(nt, 0.0);
    for (const auto* s : enstrophy)
        for (std::size_t i = 0; i < nt; ++i) tr.mean[i] += (*s)[i];
    const double inv_m = 1.0 / static_cast<double>(enstrophy.size());
    for (double& v : tr.mean) v *= inv_m;

    tr.running_mean.resize(nt);
    double acc = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        acc += tr.mean[i];
        tr.running_mean[i] = acc / static_cast<double>(i + 1);
        tr.sup = std::max(tr.sup, tr.mean[i]);
    }

    const std::size_t w0 = first_index_after(times, t_half - 1e-9);
    double mx = 0.0, avg = 0.0;
    std::size_t n = 0;
    for (std::size_t i = w0; i < nt; ++i) {
        mx = std::max(mx, tr.running_mean[i]);
        avg += tr.running_mean[i];
        ++n;
    }
    if (n > 0) {
        avg /= static_cast<double>(n);
        tr.stabilization_ratio = avg > 0.0 ? mx / avg : (mx == 0.0 ? 1.0 : kInf);
        tr.bounded = tr.stabilization_ratio < 1.2;
    }
    return tr;
}

} // namespace detail

/// Experiment result when the caller also needs the raw per-member series
/// (e.g. to write time-series files or final checkpoints).
struct LabRun {
    std::vector<MemberSeries> members;
    ErgodicReport report;
};

/// Run the two-initial-condition ergodicity experiment and assemble the
/// report.  Refuses inadmissible noise unless cfg.force is set; propagates
/// member failures (including instabilities) with the member id attached.
inline LabRun birkhoff_experiment_full(const LabConfig& cfg) {
    cfg.params.validate();
    cfg.noise.validate();
    if (cfg.members < 2)
        throw std::invalid_argument("birkhoff_experiment: need at least 2 members per group");
    if (!(cfg.burn_in >= 0.0) || !(cfg.t_end > cfg.burn_in))
        throw std::invalid_argument("birkhoff_experiment: need 0 <= burn_in < t_end");

    const ModeTable table(cfg.params.truncation);
    const SpectralField ic0 = make_initial_field(cfg.ic_a, table, cfg.seed, 0);
    const SpectralField ic1 = make_initial_field(cfg.ic_b, table, cfg.seed, 1);
    if ((ic0 - ic1).norm_sq() == 0.0)
        throw std::invalid_argument("birkhoff_experiment: the two initial conditions coincide");

    ErgodicReport rep;
    rep.conditions = evaluate_conditions(cfg.noise, cfg.params.nu);
    if (!rep.conditions.admissible && !cfg.force) {
        const std::string which = first_failed_condition(rep.conditions);
        throw AdmissibilityError(which, "noise fails uniqueness condition " + which);
    }
    rep.degenerate = rep.conditions.trace.truncated == 0.0;
    rep.members_per_group = cfg.members;

    SimulateOptions opt;
    opt.t_end = cfg.t_end;
    opt.snapshot_every = cfg.snapshot_every;
    opt.slice_modes = cfg.slice_modes;
    opt.checkpoint_every = cfg.checkpoint_every;
    opt.on_checkpoint = cfg.on_checkpoint;
    std::vector<MemberSeries> members =
        run_ensemble(cfg.params, cfg.noise, {ic0, ic1}, cfg.members, cfg.seed, opt, cfg.threads);

    rep.times = members.front().t;
    const double t_half = cfg.t_end / 2.0;
    {
        const std::size_t i0 = detail::first_index_after(
            rep.times, std::max(cfg.burn_in, rep.times.front()));
        rep.times_running.assign(rep.times.begin() + static_cast<std::ptrdiff_t>(i0),
                                 rep.times.end());
    }

    // group the raw series
    const auto split = [&](auto extract) {
        std::array<std::vector<std::vector<double>>, 2> by_group;
        for (const MemberSeries& ms : members) by_group[ms.group].push_back(extract(ms));
        return by_group;
    };
    const auto enstrophy_series =
        split([](const MemberSeries& ms) { return ms.enstrophy; });
    const auto energy_series = split([](const MemberSeries& ms) { return ms.energy; });

    rep.observables.push_back(
        detail::reduce_observable("enstrophy", rep.times, enstrophy_series, cfg.burn_in, t_half));
    rep.observables.push_back(
        detail::reduce_observable("energy", rep.times, energy_series, cfg.burn_in, t_half));
    for (std::size_t j = 0; j < cfg.slice_modes.size(); ++j) {
        const ModeIndex mi = table.mode(cfg.slice_modes[j]);
        const auto series = split([j](const MemberSeries& ms) {
            std::vector<double> s(ms.slice.size());
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = ms.slice[i][j];
            return s;
        });
        rep.observables.push_back(detail::reduce_observable(
            "coeff_" + std::to_string(mi.m) + "_" + std::to_string(mi.n), rep.times, series,
            cfg.burn_in, t_half));
    }

    // indicator observable around the pooled terminal median
    {
        const std::size_t w0 = detail::first_index_after(rep.times, t_half - 1e-9);
        std::vector<double> pooled;
        for (const MemberSeries& ms : members)
            for (std::size_t i = w0; i < ms.enstrophy.size(); ++i)
                pooled.push_back(ms.enstrophy[i]);
        rep.indicator_threshold = median(pooled);
        const double q = rep.indicator_threshold;
        const auto series = split([q](const MemberSeries& ms) {
            std::vector<double> s(ms.enstrophy.size());
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = ms.enstrophy[i] > q ? 1.0 : 0.0;
            return s;
        });
        rep.observables.push_back(detail::reduce_observable("indicator_enstrophy_above_median",
                                                            rep.times, series, cfg.burn_in,
                                                            t_half));
    }

    // second-moment boundedness, per group and pooled
    for (int g = 0; g < 2; ++g) {
        std::vector<const std::vector<double>*> ptrs;
        for (const auto& s : enstrophy_series[g]) ptrs.push_back(&s);
        rep.moments[g] = detail::moment_trace(rep.times, ptrs, t_half);
    }
    {
        std::vector<const std::vector<double>*> ptrs;
        for (int g = 0; g < 2; ++g)
            for (const auto& s : enstrophy_series[g]) ptrs.push_back(&s);
        rep.moments_pooled = detail::moment_trace(rep.times, ptrs, t_half);
    }
    return LabRun{std::move(members), std::move(rep)};
}

inline ErgodicReport birkhoff_experiment(const LabConfig& cfg) {
    return birkhoff_experiment_full(cfg).report;
}

} // namespace qgergo
