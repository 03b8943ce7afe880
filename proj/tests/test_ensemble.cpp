#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <mutex>
#include <set>
#include <vector>

#include "qgergo/ensemble.hpp"

using namespace qgergo;

namespace {

ModelParams make_params(int truncation, double dt) {
    ModelParams p;
    p.truncation = truncation;
    p.nu = 0.5;
    p.ekman_r = 0.1;
    p.beta = 0.0;
    p.dt = dt;
    return p;
}

} // namespace

TEST_CASE("initial-condition factories populate the right coefficients") {
    const ModeTable table(4);

    const SpectralField zero = make_initial_field(InitialCondition::zero(), table, 1, 0);
    REQUIRE(zero.norm_sq() == 0.0);

    const SpectralField single =
        make_initial_field(InitialCondition::single_mode(2, 1, 0.75), table, 1, 0);
    REQUIRE(single.at(2, 1) == 0.75);
    REQUIRE(std::abs(single.norm_sq() - 0.75 * 0.75) < 1e-15);

    REQUIRE_THROWS_AS(
        make_initial_field(InitialCondition::single_mode(5, 1, 1.0), table, 1, 0),
        std::invalid_argument);
}

TEST_CASE("random initial fields scale draws by the wavenumber and land on the right mode") {
    const ModeTable table(3);
    const std::uint64_t seed = 99;
    const SpectralField f =
        make_initial_field(InitialCondition::random(2.0), table, seed, 7);

    for (std::size_t k = 1; k <= table.size(); ++k) {
        const ModeIndex& mi = table.mode(k);
        const double expect = 2.0 * standard_normal(RngKey{seed, 7}, k, kStreamInitialCondition) /
                              table.wavenumber_sq(k);
        REQUIRE(f.at(mi.m, mi.n) == expect);
    }

    const SpectralField g =
        make_initial_field(InitialCondition::random(2.0), table, seed, 8);
    REQUIRE((f - g).norm_sq() > 0.0);
    const SpectralField f2 =
        make_initial_field(InitialCondition::random(2.0), table, seed, 7);
    REQUIRE((f - f2).norm_sq() == 0.0);
}

TEST_CASE("snapshots land on absolute step multiples") {
    const ModelParams params = make_params(3, 1e-2);
    Integrator integ(params, NoiseSpec::power(3, 0.5, 0.5, 0.5));
    FlowState st(3);
    SimulateOptions opt;
    opt.t_end = 0.05;
    opt.snapshot_every = 2;
    const MemberSeries s = simulate_member(integ, std::move(st), 0, 0, 11, opt);

    REQUIRE(s.t.size() == 3);
    REQUIRE(s.t[0] == 0.0);
    REQUIRE(std::abs(s.t[1] - 0.02) < 1e-12);
    REQUIRE(std::abs(s.t[2] - 0.04) < 1e-12);
    REQUIRE(std::abs(s.final_state.t - 0.05) < 1e-12);
    REQUIRE(s.final_state.step == 5);

    // a member resumed from a mid-run state records the same grid tail
    Integrator integ2(params, NoiseSpec::power(3, 0.5, 0.5, 0.5));
    FlowState replay(3);
    for (int i = 0; i < 3; ++i) integ2.step(replay, RngKey{11, 0});
    const MemberSeries tail = simulate_member(integ2, std::move(replay), 0, 0, 11, opt);
    REQUIRE(tail.t.size() == 1);
    REQUIRE(std::abs(tail.t[0] - 0.04) < 1e-12);
    REQUIRE(tail.enstrophy[0] == s.enstrophy[2]);
}

TEST_CASE("simulate_member validates horizon and cadence") {
    const ModelParams params = make_params(3, 1e-2);
    Integrator integ(params, NoiseSpec::zero(3));
    FlowState st(3);
    st.step = 100;
    st.t = 1.0;
    SimulateOptions opt;
    opt.t_end = 0.5;
    REQUIRE_THROWS_AS(simulate_member(integ, std::move(st), 0, 0, 1, opt),
                      std::invalid_argument);
    FlowState st2(3);
    opt.t_end = 1.0;
    opt.snapshot_every = 0;
    REQUIRE_THROWS_AS(simulate_member(integ, std::move(st2), 0, 0, 1, opt),
                      std::invalid_argument);
}

TEST_CASE("ensembles are reproducible across thread counts") {
    const ModelParams params = make_params(4, 5e-3);
    const NoiseSpec spec = NoiseSpec::power(4, 1.0, 0.5, 0.5);
    const ModeTable table(4);
    std::vector<SpectralField> ics{
        make_initial_field(InitialCondition::zero(), table, 5, 0),
        make_initial_field(InitialCondition::single_mode(1, 1, 1.0), table, 5, 1)};
    SimulateOptions opt;
    opt.t_end = 0.1;
    opt.snapshot_every = 5;

    const auto a = run_ensemble(params, spec, ics, 3, 5, opt, 1);
    const auto b = run_ensemble(params, spec, ics, 3, 5, opt, 4);
    REQUIRE(a.size() == 6);
    REQUIRE(b.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].member == i);
        REQUIRE(a[i].group == i / 3);
        REQUIRE(a[i].t == b[i].t);
        REQUIRE(a[i].enstrophy == b[i].enstrophy);
        REQUIRE(a[i].energy == b[i].energy);
        REQUIRE(a[i].slice == b[i].slice);
    }
    // members differ from each other pathwise
    REQUIRE(a[0].enstrophy.back() != a[1].enstrophy.back());
    // groups start from their own initial conditions
    REQUIRE(a[0].enstrophy[0] == 0.0);
    REQUIRE(a[3].enstrophy[0] == 1.0);
}

TEST_CASE("checkpoint callbacks fire on the requested cadence") {
    const ModelParams params = make_params(3, 1e-2);
    const NoiseSpec spec = NoiseSpec::power(3, 0.5, 0.5, 0.5);
    const ModeTable table(3);
    std::vector<SpectralField> ics{make_initial_field(InitialCondition::zero(), table, 2, 0)};

    std::mutex mu;
    std::set<std::pair<std::size_t, std::uint64_t>> seen;
    SimulateOptions opt;
    opt.t_end = 0.1;
    opt.snapshot_every = 5;
    opt.checkpoint_every = 4;
    opt.on_checkpoint = [&](const FlowState& st, std::size_t member) {
        std::lock_guard<std::mutex> lk(mu);
        seen.emplace(member, st.step);
    };
    run_ensemble(params, spec, ics, 2, 2, opt, 2);

    std::set<std::pair<std::size_t, std::uint64_t>> expect;
    for (std::size_t member = 0; member < 2; ++member)
        for (std::uint64_t step = 4; step <= 10; step += 4) expect.emplace(member, step);
    REQUIRE(seen == expect);
}

TEST_CASE("a diverging member surfaces as a tagged failure") {
    const ModelParams params = make_params(3, 1e-2);
    const ModeTable table(3);
    std::vector<SpectralField> ics{
        make_initial_field(InitialCondition::single_mode(1, 1, 1e12), table, 3, 0)};
    SimulateOptions opt;
    opt.t_end = 0.5;
    opt.snapshot_every = 10;
    try {
        run_ensemble(params, NoiseSpec::zero(3), ics, 1, 3, opt, 1);
        FAIL("expected MemberFailure");
    } catch (const MemberFailure& e) {
        REQUIRE(e.member() == 0);
        REQUIRE(e.instability());
    }
}

TEST_CASE("thread resolution keeps explicit requests") {
    REQUIRE(resolve_threads(3) == 3);
    REQUIRE(resolve_threads(1) == 1);
    REQUIRE(resolve_threads(0) >= 1);
}
