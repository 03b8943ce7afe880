#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "qgergo/config.hpp"

using namespace qgergo;

namespace {

const char* kMinimal = R"({
    "nu": 1.0, "r": 0.1, "beta": 0.0, "N": 8,
    "dt": 0.001, "t_end": 5.0, "seed": 42, "ensemble_size": 4,
    "noise": {"law": "power", "c": 1.0, "p": 0.5}
})";

std::string with_extra(const std::string& extra) {
    std::string s(kMinimal);
    s.insert(s.rfind('}'), "," + extra);
    return s;
}

} // namespace

TEST_CASE("minimal configuration resolves documented defaults") {
    const RunConfig cfg = parse_config(kMinimal);
    REQUIRE(cfg.nu == 1.0);
    REQUIRE(cfg.r == 0.1);
    REQUIRE(cfg.truncation == 8);
    REQUIRE(cfg.dt == 0.001);
    REQUIRE(cfg.t_end == 5.0);
    REQUIRE(cfg.seed == 42);
    REQUIRE(cfg.ensemble_size == 4);
    REQUIRE(cfg.burn_in == 1.0);         // t_end / 5
    REQUIRE(cfg.snapshot_every == 100);  // 0.1 / dt
    REQUIRE(cfg.checkpoint_every == 0);
    REQUIRE(cfg.output_dir == "out");
    REQUIRE(cfg.ic_a.kind == InitialCondition::Kind::Zero);
    REQUIRE_FALSE(cfg.ic_b.has_value());
    REQUIRE(cfg.observables == std::vector<std::string>{"enstrophy", "energy", "coeff_1_1"});
    REQUIRE(cfg.slice_modes == std::vector<std::size_t>{1});
    REQUIRE(cfg.noise.law == NoiseSpec::Law::Power);
    REQUIRE(cfg.noise.gamma == 0.5);
    REQUIRE(cfg.params().ekman_r == 0.1);
    REQUIRE(cfg.params().truncation == 8);
}

TEST_CASE("full configuration round-trips through its echo") {
    const std::string text = with_extra(R"(
        "burn_in": 2.0, "snapshot_every": 50, "checkpoint_every": 500,
        "output_dir": "lab",
        "initial_condition": {"kind": "single_mode", "mode": [2, 1], "amplitude": 0.5},
        "initial_condition_2": {"kind": "random", "rng_amplitude": 0.25},
        "observables": ["enstrophy", "coeff_2_2", "coeff_1_1"]
    )");
    const RunConfig cfg = parse_config(text);
    REQUIRE(cfg.burn_in == 2.0);
    REQUIRE(cfg.snapshot_every == 50);
    REQUIRE(cfg.checkpoint_every == 500);
    REQUIRE(cfg.output_dir == "lab");
    REQUIRE(cfg.ic_a.kind == InitialCondition::Kind::SingleMode);
    REQUIRE(cfg.ic_a.mode_m == 2);
    REQUIRE(cfg.ic_a.amplitude == 0.5);
    REQUIRE(cfg.ic_b.has_value());
    REQUIRE(cfg.ic_b->kind == InitialCondition::Kind::Random);
    REQUIRE(cfg.ic_b->rng_amplitude == 0.25);
    const ModeTable table(8);
    REQUIRE(cfg.slice_modes ==
            std::vector<std::size_t>{table.k_of(1, 1), table.k_of(2, 2)});
    REQUIRE(cfg.observables ==
            std::vector<std::string>{"enstrophy", "energy", "coeff_1_1", "coeff_2_2"});

    const nlohmann::json echo = config_to_json(cfg);
    const RunConfig cfg2 = parse_config(echo.dump());
    REQUIRE(config_to_json(cfg2) == echo);
    REQUIRE(cfg2.slice_modes == cfg.slice_modes);
    REQUIRE(cfg2.noise.law == cfg.noise.law);
    REQUIRE(cfg2.ic_b->kind == cfg.ic_b->kind);
}

TEST_CASE("table noise requires a full amplitude table") {
    std::string good(kMinimal);
    const std::string table_noise =
        R"("noise": {"law": "table", "table": [)" + [] {
            std::string s;
            for (int i = 0; i < 64; ++i) s += (i ? ",0.5" : "0.5");
            return s;
        }() + "]}";
    good.replace(good.find(R"("noise": {"law": "power", "c": 1.0, "p": 0.5})"),
                 std::string(R"("noise": {"law": "power", "c": 1.0, "p": 0.5})").size(),
                 table_noise);
    const RunConfig cfg = parse_config(good);
    REQUIRE(cfg.noise.law == NoiseSpec::Law::Table);
    REQUIRE(cfg.noise.table.size() == 64);

    std::string bad = good;
    bad.replace(bad.find("0.5,0.5"), 7, "0.5"); // drop one entry
    REQUIRE_THROWS_WITH(parse_config(bad),
                        Catch::Matchers::ContainsSubstring("N*N = 64"));
}

TEST_CASE("parse errors are distinguished from validation errors") {
    REQUIRE_THROWS_AS(parse_config("{"), ConfigParseError);
    REQUIRE_THROWS_AS(parse_config(R"({"nu": 1, "nu": 2})"), ConfigParseError);
    REQUIRE_THROWS_WITH(parse_config(R"({"nu": 1, "nu": 2})"),
                        Catch::Matchers::ContainsSubstring("duplicate key 'nu'"));
    REQUIRE_THROWS_AS(parse_config("[1, 2]"), ConfigValidationError);
    REQUIRE_THROWS_AS(parse_config(with_extra(R"("mystery": 1)")), ConfigValidationError);
}

TEST_CASE("field validation rejects out-of-range values") {
    auto reject = [](const std::string& find, const std::string& replace,
                     const std::string& needle) {
        std::string s(kMinimal);
        s.replace(s.find(find), find.size(), replace);
        REQUIRE_THROWS_WITH(parse_config(s), Catch::Matchers::ContainsSubstring(needle));
    };
    reject(R"("nu": 1.0)", R"("nu": 0.0)", "'nu' must be > 0");
    reject(R"("r": 0.1)", R"("r": -0.5)", "'r' must be >= 0");
    reject(R"("N": 8)", R"("N": 0)", "[1, 4096]");
    reject(R"("N": 8)", R"("N": 5000)", "[1, 4096]");
    reject(R"("dt": 0.001)", R"("dt": 0)", "'dt' must be > 0");
    reject(R"("ensemble_size": 4)", R"("ensemble_size": 0)",
           "'ensemble_size' must be >= 1");
    reject(R"("seed": 42)", R"("seed": -1)", "nonnegative integer");

    REQUIRE_THROWS_WITH(parse_config(with_extra(R"("burn_in": 5.0)")),
                        Catch::Matchers::ContainsSubstring("burn_in < t_end"));
    REQUIRE_THROWS_WITH(parse_config(with_extra(R"("snapshot_every": 0)")),
                        Catch::Matchers::ContainsSubstring("'snapshot_every' must be >= 1"));
    REQUIRE_THROWS_WITH(parse_config(with_extra(R"("output_dir": "")")),
                        Catch::Matchers::ContainsSubstring("'output_dir' must not be empty"));
}

TEST_CASE("noise validation pins gamma and law") {
    auto noise = [](const std::string& body) {
        std::string s(kMinimal);
        const std::string find = R"({"law": "power", "c": 1.0, "p": 0.5})";
        s.replace(s.find(find), find.size(), body);
        return s;
    };
    REQUIRE_THROWS_WITH(
        parse_config(noise(R"({"law": "power", "c": 1.0, "p": 0.5, "gamma": 1.5})")),
        Catch::Matchers::ContainsSubstring("must lie strictly in (0, 1)"));
    REQUIRE_THROWS_WITH(
        parse_config(noise(R"({"law": "power", "c": 1.0, "p": 0.5, "gamma": 0.0})")),
        Catch::Matchers::ContainsSubstring("must lie strictly in (0, 1)"));
    REQUIRE_THROWS_WITH(parse_config(noise(R"({"law": "exotic"})")),
                        Catch::Matchers::ContainsSubstring("power|table|zero"));
    REQUIRE_THROWS_WITH(parse_config(noise(R"({"law": "power", "p": 0.5})")),
                        Catch::Matchers::ContainsSubstring("'noise.c' is required"));
    REQUIRE_THROWS_WITH(parse_config(noise(R"({"law": "power", "c": -1.0, "p": 0.5})")),
                        Catch::Matchers::ContainsSubstring("'noise.c' must be finite and >= 0"));
    REQUIRE_THROWS_WITH(parse_config(noise(R"({"law": "zero", "c": 1.0})")),
                        Catch::Matchers::ContainsSubstring("not recognized"));
    const RunConfig z = parse_config(noise(R"({"law": "zero", "gamma": 0.25})"));
    REQUIRE(z.noise.law == NoiseSpec::Law::Zero);
    REQUIRE(z.noise.gamma == 0.25);
}

TEST_CASE("observable names must follow the coefficient pattern") {
    REQUIRE_THROWS_WITH(parse_config(with_extra(R"("observables": ["coeff_2_1x"])")),
                        Catch::Matchers::ContainsSubstring("not recognized"));
    REQUIRE_THROWS_WITH(parse_config(with_extra(R"("observables": ["coeff_-1_2"])")),
                        Catch::Matchers::ContainsSubstring("not recognized"));
    REQUIRE_THROWS_WITH(parse_config(with_extra(R"("observables": ["coeff_9_1"])")),
                        Catch::Matchers::ContainsSubstring("outside the truncation"));
    REQUIRE_THROWS_WITH(parse_config(with_extra(R"("observables": ["vorticity"])")),
                        Catch::Matchers::ContainsSubstring("not recognized"));
    // duplicates collapse, (1,1) stays first
    const RunConfig cfg = parse_config(
        with_extra(R"("observables": ["coeff_3_1", "coeff_3_1", "energy"])"));
    REQUIRE(cfg.observables ==
            std::vector<std::string>{"enstrophy", "energy", "coeff_1_1", "coeff_3_1"});
    REQUIRE(cfg.slice_modes.size() == 2);
}

TEST_CASE("initial conditions are validated in place") {
    REQUIRE_THROWS_WITH(
        parse_config(with_extra(
            R"("initial_condition": {"kind": "single_mode", "mode": [9, 1]})")),
        Catch::Matchers::ContainsSubstring("inside the truncation"));
    REQUIRE_THROWS_WITH(
        parse_config(with_extra(R"("initial_condition": {"kind": "single_mode"})")),
        Catch::Matchers::ContainsSubstring("'initial_condition.mode' is required"));
    REQUIRE_THROWS_WITH(
        parse_config(with_extra(R"("initial_condition": {"kind": "warm"})")),
        Catch::Matchers::ContainsSubstring("zero|single_mode|random"));
    REQUIRE_THROWS_WITH(
        parse_config(with_extra(
            R"("initial_condition": {"kind": "random", "rng_amplitude": -1.0})")),
        Catch::Matchers::ContainsSubstring("finite and >= 0"));
    REQUIRE_THROWS_WITH(
        parse_config(with_extra(
            R"("initial_condition": {"kind": "zero", "amplitude": 2.0})")),
        Catch::Matchers::ContainsSubstring("not recognized"));
}

TEST_CASE("missing required keys are reported by name") {
    const std::vector<std::pair<std::string, std::string>> fields = {
        {"nu", "1.0"},   {"r", "0.1"},   {"beta", "0.0"},
        {"N", "8"},      {"dt", "0.001"}, {"t_end", "5.0"},
        {"seed", "42"},  {"ensemble_size", "4"},
        {"noise", R"({"law": "power", "c": 1.0, "p": 0.5})"}};
    for (std::size_t skip = 0; skip < fields.size(); ++skip) {
        std::string s = "{";
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == skip) continue;
            if (s.size() > 1) s += ",";
            s += "\"" + fields[i].first + "\": " + fields[i].second;
        }
        s += "}";
        REQUIRE_THROWS_WITH(
            parse_config(s),
            Catch::Matchers::ContainsSubstring("'" + fields[skip].first + "' is required"));
    }
}
