// Acceptance gate: one line per criterion, nonzero exit on any failure.
//
// Slow statistical runs (the 64-member ensemble behind criteria 6 and 7) are
// executed once and shared.  Every tolerance is stated in the output line so
// a failure is diagnosable from the log alone.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "qgergo/kappa.hpp"
#include "qgergo/runner.hpp"
#include "oracles.hpp"

using namespace qgergo;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
    int id = 0;
    bool pass = false;
    std::string detail;
};

std::vector<CriterionResult> g_results;

void record(int id, bool pass, const std::string& detail) {
    g_results.push_back({id, pass, detail});
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return std::string(buf);
}

// ---------------------------------------------------------------- criterion 1

/// Deterministic linear run: no noise, no rotation, a single excited mode.
/// The scheme integrates the linear part exactly, so the terminal norm must
/// match exp((-2 pi^2 - r) t) to rounding, far inside the 1e-6 budget.
void criterion_linear_decay() {
    const auto t0 = std::chrono::steady_clock::now();
    ModelParams params;
    params.nu = 1.0;
    params.ekman_r = 0.1;
    params.beta = 0.0;
    params.truncation = 8;
    params.dt = 1e-3;
    const NoiseSpec noise = NoiseSpec::zero(8);

    Integrator integ(params, noise);
    FlowState state(8);
    state.omega.at(1, 1) = 1.0;
    for (int s = 0; s < 1000; ++s) integ.step(state, RngKey{1, 0});

    const double measured = std::sqrt(state.omega.norm_sq());
    const double expected = std::exp(-(2.0 * kPiSq + 0.1) * 1.0);
    const double rel = std::abs(measured - expected) / expected;
    record(1, rel <= 1e-6,
           fmt("single-mode norm rel err %.3e (tol 1e-06), %.2fs", rel, seconds_since(t0)));
}

// ---------------------------------------------------------------- criterion 2

/// Exact OU transitions at a step long enough to decorrelate consecutive
/// samples; the sample variance of z_{1,1} must sit within three standard
/// errors of alpha^2 / (2 |lambda|) = 1 / (4 pi^2).
void criterion_ou_variance() {
    const auto t0 = std::chrono::steady_clock::now();
    const NoiseSpec noise = NoiseSpec::power(1, 1.0, 0.5, 0.5);
    const ModeTable table(1);
    OuState state(1);
    const RngKey key{424242, 0};

    const std::size_t samples = 100000;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        ou_step(state, noise, table, 1.0, 1.0, key);
        const double z = state.z.at(1, 1);
        sum_sq += z * z;
    }
    const double variance = sum_sq / static_cast<double>(samples);
    const double truth = stationary_variance(noise, table, 1.0, 1);
    const double stderr3 = 3.0 * truth * std::sqrt(2.0 / static_cast<double>(samples - 1));
    const double dev = std::abs(variance - truth);
    record(2, dev <= stderr3,
           fmt("variance %.6f vs 1/(4 pi^2) = %.6f, |dev| %.2e <= 3 se %.2e, %.2fs", variance,
               truth, dev, stderr3, seconds_since(t0)));
}

// ---------------------------------------------------------------- criterion 3

/// The closed-form Hilbert-Schmidt integral against an adaptive time
/// quadrature of ||S(r) sqrt(Q)||_HS^2 up to T = 50 / (nu pi^2), by which
/// point the integrand has decayed below any representable remainder.
void criterion_hs_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    const double nu = 1.0;
    const NoiseSpec noise = NoiseSpec::power(16, 1.0, 0.5, 0.5);
    const ModeTable table(16);

    std::vector<double> a2, lam;
    for (std::size_t k = 1; k <= table.size(); ++k) {
        const double a = noise.alpha(k);
        a2.push_back(a * a);
        lam.push_back(table.lambda(k, nu));
    }
    const double closed = hs_integral(noise, nu);
    const double horizon = 50.0 / (nu * kPiSq);
    const double quad = oracle::hs_time_quadrature(a2, lam, horizon);
    const double rel = std::abs(closed - quad) / closed;
    record(3, rel <= 1e-6,
           fmt("closed form %.9f vs quadrature %.9f, rel err %.3e (tol 1e-06), %.2fs", closed,
               quad, rel, seconds_since(t0)));
}

// ---------------------------------------------------------------- criterion 4

/// Admissibility classification of three covariance laws through the exact
/// exponent test: k^(-1/2) and k^(-3/8) pass, a flat spectrum fails.
void criterion_admissibility() {
    const auto t0 = std::chrono::steady_clock::now();
    const ConditionReport half = evaluate_conditions(NoiseSpec::power(16, 1.0, 0.5, 0.5), 1.0);
    const ConditionReport three_eighths =
        evaluate_conditions(NoiseSpec::power(16, 1.0, 0.375, 0.5), 1.0);
    const ConditionReport flat = evaluate_conditions(NoiseSpec::power(16, 1.0, 0.0, 0.5), 1.0);

    const bool pass = half.admissible && three_eighths.admissible && !flat.admissible;
    record(4, pass,
           fmt("k^-1/2 %s, k^-3/8 %s, flat %s (want yes/yes/no), %.2fs",
               half.admissible ? "admissible" : "rejected",
               three_eighths.admissible ? "admissible" : "rejected",
               flat.admissible ? "admissible" : "rejected", seconds_since(t0)));
}

// ---------------------------------------------------------------- criterion 5

/// Advection-term identities on 100 random coefficient pairs at N = 16:
/// antisymmetry of the projected Jacobian, the two spectral conservation
/// products <a, J(a,b)> and <b, J(a,b)>, and the domain integral <1, J> of
/// the unprojected Jacobian, which is captured alias-free by recomputing the
/// same pair at a padded truncation that holds every product frequency.
void criterion_jacobian_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    const int nt = 16;
    const int padded = 40; // product frequencies reach 2*16 = 32 < 40
    const ModeTable table(nt);
    SineBasisPlan plan(nt);
    SineBasisPlan plan_padded(padded);

    double worst_antisym = 0.0, worst_a = 0.0, worst_b = 0.0, worst_const = 0.0;
    for (std::uint64_t pair = 0; pair < 100; ++pair) {
        SpectralField a(nt), b(nt), a_pad(padded), b_pad(padded);
        for (std::size_t k = 1; k <= table.size(); ++k) {
            const ModeIndex mi = table.mode(k);
            const double scale = 0.5 / (static_cast<double>(mi.m) * mi.m +
                                        static_cast<double>(mi.n) * mi.n);
            const double ca = scale * standard_normal(RngKey{2718, pair}, k, 0);
            const double cb = scale * standard_normal(RngKey{2718, pair}, k, 1);
            a.at(mi.m, mi.n) = ca;
            b.at(mi.m, mi.n) = cb;
            a_pad.at(mi.m, mi.n) = ca;
            b_pad.at(mi.m, mi.n) = cb;
        }

        const SpectralField jab = jacobian(plan, a, b);
        const SpectralField jba = jacobian(plan, b, a);
        double dot_a = 0.0, dot_b = 0.0;
        for (int m = 1; m <= nt; ++m)
            for (int n = 1; n <= nt; ++n) {
                worst_antisym = std::max(worst_antisym, std::abs(jab.at(m, n) + jba.at(m, n)));
                dot_a += a.at(m, n) * jab.at(m, n);
                dot_b += b.at(m, n) * jab.at(m, n);
            }
        worst_a = std::max(worst_a, std::abs(dot_a));
        worst_b = std::max(worst_b, std::abs(dot_b));

        // <1, J> over the square: integral of basis mode (m,n) is
        // 8/(m n pi^2) for odd m,n and zero otherwise.
        const SpectralField jpad = jacobian(plan_padded, a_pad, b_pad);
        double integral = 0.0;
        for (int m = 1; m <= padded; m += 2)
            for (int n = 1; n <= padded; n += 2)
                integral += jpad.at(m, n) * 8.0 / (static_cast<double>(m) * n * kPiSq);
        worst_const = std::max(worst_const, std::abs(integral));
    }

    const double tol = 1e-10;
    const bool pass =
        worst_antisym <= tol && worst_a <= tol && worst_b <= tol && worst_const <= tol;
    record(5, pass,
           fmt("antisym %.2e, <a,J> %.2e, <b,J> %.2e, <1,J> %.2e (tol 1e-10), %.2fs",
               worst_antisym, worst_a, worst_b, worst_const, seconds_since(t0)));
}

// ----------------------------------------------------------- criteria 6 and 7

/// One 64-trajectory ensemble (32 per initial condition) at N = 16 over
/// [0, 50] shared by the moment-bound check and the ergodicity checks.
void criteria_moment_bound_and_ergodicity() {
    const auto t0 = std::chrono::steady_clock::now();
    LabConfig lab;
    lab.params.nu = 1.0;
    lab.params.ekman_r = 0.1;
    lab.params.beta = 0.0;
    lab.params.truncation = 16;
    lab.params.dt = 1e-3;
    lab.noise = NoiseSpec::power(16, 1.0, 0.5, 0.5);
    lab.ic_a = InitialCondition::zero();
    lab.ic_b = InitialCondition::single_mode(1, 1, 2.0);
    lab.members = 32; // per group: 64 trajectories total
    lab.t_end = 50.0;
    lab.burn_in = 10.0;
    lab.seed = 20260822;
    lab.snapshot_every = 100;
    lab.threads = 4;

    const ErgodicReport report = birkhoff_experiment_full(lab).report;

    const MomentTrace& pooled = report.moments_pooled;
    record(6, pooled.bounded && pooled.stabilization_ratio < 1.2,
           fmt("mean enstrophy sup %.4f, second-half max/mean %.4f (< 1.2), %.0fs",
               pooled.sup, pooled.stabilization_ratio, seconds_since(t0)));

    const ObservableReport& ens = report.observables.front();
    const bool pass = ens.birkhoff_pass && ens.cross_ic_pass && ens.ks.pass;
    record(7, pass,
           fmt("birkhoff dev %.2e/%.2e (tol %.2e/%.2e), cross-IC %.2e (tol %.2e), "
               "KS %.4f (crit %.4f at 0.01)",
               ens.birkhoff_discrepancy[0], ens.birkhoff_discrepancy[1],
               ens.birkhoff_tolerance[0], ens.birkhoff_tolerance[1], ens.cross_ic_discrepancy,
               ens.cross_ic_tolerance, ens.ks.statistic, ens.ks.critical));
}

// ---------------------------------------------------------------- criterion 8

/// Interior-cone constant of the unit square: the library grid search
/// against an independently structured brute-force count at resolution 1024.
void criterion_kappa() {
    const auto t0 = std::chrono::steady_clock::now();
    const PolygonDomain square = PolygonDomain::unit_square();
    const KappaEstimate est = kappa_estimate(square, 512, 4);
    const double brute = oracle::kappa_unit_square(1024, 64, 512, 4);
    const double rel = std::abs(est.kappa - brute) / brute;
    record(8, est.kappa > 0.0 && rel <= 0.02,
           fmt("estimate %.5f vs brute force %.5f, rel dev %.4f (tol 0.02), %.0fs", est.kappa,
               brute, rel, seconds_since(t0)));
}

// ---------------------------------------------------------------- criterion 9

const char* kReproConfig = R"({
  "nu": 1.0,
  "r": 0.1,
  "beta": 0.0,
  "N": 8,
  "dt": 0.001,
  "t_end": 1.0,
  "burn_in": 0.2,
  "seed": 11,
  "ensemble_size": 2,
  "snapshot_every": 100,
  "checkpoint_every": 250,
  "noise": {"law": "power", "c": 1.0, "p": 0.5},
  "initial_condition": {"kind": "single_mode", "mode": [1, 1], "amplitude": 1.0}
})";

fs::path fresh_dir(const std::string& leaf) {
    const fs::path p = fs::temp_directory_path() / "qgergo-acceptance" / leaf;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

/// Same config and seed twice must give byte-identical CSVs, and a member
/// resumed from a mid-run checkpoint must land on the bit-identical final
/// state and snapshot rows.
void criterion_reproducibility() {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = parse_config(kReproConfig);

    const fs::path dir_a = fresh_dir("a");
    const fs::path dir_b = fresh_dir("b");
    RunOptions opts;
    opts.threads = 2;
    opts.output_dir = dir_a.string();
    run(cfg, opts);
    opts.output_dir = dir_b.string();
    run(cfg, opts);
    const std::string csv_a = read_text_file(dir_a / "timeseries.csv");
    const bool rerun_identical = csv_a == read_text_file(dir_b / "timeseries.csv");

    const fs::path dir_r = fresh_dir("resume");
    ResumeOptions ropts;
    ropts.t_end = cfg.t_end;
    ropts.output_dir = dir_r.string();
    resume((dir_a / "checkpoints" / "member_0_step_500.bin").string(), ropts);
    const bool final_identical =
        read_text_file(dir_r / "checkpoints" / "member_0_final.bin") ==
        read_text_file(dir_a / "checkpoints" / "member_0_final.bin");

    // Resumed rows must be the aligned tail of the uninterrupted member-0 rows.
    const std::string resumed_csv = read_text_file(dir_r / "timeseries.csv");
    bool rows_identical = true;
    {
        std::size_t pos = resumed_csv.find('\n') + 1; // skip header
        std::string tail;
        while (pos < resumed_csv.size()) {
            const std::size_t nl = resumed_csv.find('\n', pos);
            tail += resumed_csv.substr(pos, nl - pos + 1);
            pos = nl + 1;
        }
        rows_identical = !tail.empty() && csv_a.find(tail) != std::string::npos;
    }

    fs::remove_all(fs::temp_directory_path() / "qgergo-acceptance");
    record(9, rerun_identical && final_identical && rows_identical,
           fmt("rerun csv %s, resumed final checkpoint %s, resumed rows %s, %.1fs",
               rerun_identical ? "identical" : "DIFFERS",
               final_identical ? "identical" : "DIFFERS",
               rows_identical ? "identical" : "DIFFER", seconds_since(t0)));
}

void guarded(int id, void (*fn)()) {
    try {
        fn();
    } catch (const std::exception& e) {
        record(id, false, std::string("exception: ") + e.what());
    }
}

} // namespace

int main() {
    guarded(1, criterion_linear_decay);
    guarded(2, criterion_ou_variance);
    guarded(3, criterion_hs_identity);
    guarded(4, criterion_admissibility);
    guarded(5, criterion_jacobian_identities);
    guarded(8, criterion_kappa);
    guarded(9, criterion_reproducibility);
    guarded(6, criteria_moment_bound_and_ergodicity); // also records 7

    for (int id = 1; id <= 9; ++id) {
        bool seen = false;
        for (const CriterionResult& r : g_results) seen = seen || r.id == id;
        if (!seen) record(id, false, "not executed");
    }
    std::sort(g_results.begin(), g_results.end(),
              [](const CriterionResult& x, const CriterionResult& y) { return x.id < y.id; });
    bool all_pass = true;
    for (const CriterionResult& r : g_results) {
        std::printf("criterion %d: %s — %s\n", r.id, r.pass ? "PASS" : "FAIL",
                    r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}
