#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qgergo/ensemble.hpp"

// Run configuration: a strict JSON schema.  Unknown keys are rejected (a
// typo must not silently fall back to a default), duplicate keys are a
// parse error, and the resolved configuration echoes back to JSON that
// parses to the identical run.

namespace qgergo {

class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ConfigParseError : public ConfigError {
    using ConfigError::ConfigError;
};

class ConfigValidationError : public ConfigError {
    using ConfigError::ConfigError;
};

namespace detail {

/// SAX consumer that builds the DOM while rejecting duplicate object keys
/// (the stock parser silently keeps the last occurrence).
class StrictSax : public nlohmann::json_sax<nlohmann::json> {
public:
    nlohmann::json root;
    std::string error;

    bool null() override { return value(nullptr); }
    bool boolean(bool v) override { return value(v); }
    bool number_integer(number_integer_t v) override { return value(v); }
    bool number_unsigned(number_unsigned_t v) override { return value(v); }
    bool number_float(number_float_t v, const string_t&) override { return value(v); }
    bool string(string_t& v) override { return value(v); }
    bool binary(binary_t& v) override { return value(nlohmann::json::binary(v)); }

    bool key(string_t& k) override {
        if (!seen_.back().insert(k).second) {
            error = "duplicate key '" + k + "'";
            return false;
        }
        pending_key_ = k;
        return true;
    }

    bool start_object(std::size_t) override { return push(nlohmann::json::object()); }
    bool start_array(std::size_t) override { return push(nlohmann::json::array()); }
    bool end_object() override { return pop(); }
    bool end_array() override { return pop(); }

    bool parse_error(std::size_t, const std::string&,
                     const nlohmann::detail::exception& ex) override {
        if (error.empty()) error = ex.what();
        return false;
    }

private:
    bool push(nlohmann::json container) {
        attach_name_.push_back(current_name());
        nodes_.push_back(std::move(container));
        seen_.emplace_back();
        return true;
    }

    bool pop() {
        nlohmann::json done = std::move(nodes_.back());
        nodes_.pop_back();
        seen_.pop_back();
        const std::string name = std::move(attach_name_.back());
        attach_name_.pop_back();
        return attach(std::move(done), name);
    }

    bool value(nlohmann::json v) { return attach(std::move(v), current_name()); }

    std::string current_name() {
        if (!nodes_.empty() && nodes_.back().is_object()) {
            return std::exchange(pending_key_, std::string());
        }
        return {};
    }

    bool attach(nlohmann::json v, const std::string& name) {
        if (nodes_.empty()) {
            root = std::move(v);
        } else if (nodes_.back().is_object()) {
            nodes_.back()[name] = std::move(v);
        } else {
            nodes_.back().push_back(std::move(v));
        }
        return true;
    }

    std::vector<nlohmann::json> nodes_;
    std::vector<std::string> attach_name_;
    std::vector<std::set<std::string>> seen_;
    std::string pending_key_;
};

inline nlohmann::json parse_strict(const std::string& text) {
    StrictSax sax;
    if (!nlohmann::json::sax_parse(text, &sax))
        throw ConfigParseError("config parse error: " + sax.error);
    return std::move(sax.root);
}

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& where,
                                const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (allowed.find(item.key()) == allowed.end())
            throw ConfigValidationError("config key '" + where + item.key() +
                                        "' is not recognized");
}

inline const nlohmann::json& require_key(const nlohmann::json& obj, const std::string& where,
                                         const std::string& key) {
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigValidationError("config key '" + where + key + "' is required");
    return *it;
}

inline double as_number(const nlohmann::json& v, const std::string& name) {
    if (!v.is_number())
        throw ConfigValidationError("config key '" + name + "' must be a number");
    return v.get<double>();
}

inline std::uint64_t as_u64(const nlohmann::json& v, const std::string& name) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigValidationError("config key '" + name + "' must be a nonnegative integer");
}

inline std::string as_string(const nlohmann::json& v, const std::string& name) {
    if (!v.is_string())
        throw ConfigValidationError("config key '" + name + "' must be a string");
    return v.get<std::string>();
}

} // namespace detail

struct RunConfig {
    double nu = 1.0;
    double r = 0.1;
    double beta = 0.0;
    int truncation = 32; ///< key "N"
    double dt = 1e-3;
    double t_end = 1.0;
    double burn_in = 0.0;
    std::uint64_t seed = 0;
    std::size_t ensemble_size = 1;
    NoiseSpec noise;
    InitialCondition ic_a;
    std::optional<InitialCondition> ic_b; ///< second start for Birkhoff runs
    std::vector<std::string> observables;
    std::vector<std::size_t> slice_modes; ///< linear indices of coeff_* columns
    std::string output_dir = "out";
    std::uint64_t checkpoint_every = 0; ///< steps between checkpoints; 0 = final only
    std::uint64_t snapshot_every = 0;   ///< timeseries cadence in steps

    ModelParams params() const {
        ModelParams p;
        p.nu = nu;
        p.ekman_r = r;
        p.beta = beta;
        p.truncation = truncation;
        p.dt = dt;
        return p;
    }
};

namespace detail {

inline InitialCondition parse_ic(const nlohmann::json& obj, const std::string& where,
                                 int truncation) {
    if (!obj.is_object())
        throw ConfigValidationError("config key '" + where + "' must be an object");
    reject_unknown_keys(obj, where + ".", {"kind", "mode", "amplitude", "rng_amplitude"});
    const std::string kind = as_string(require_key(obj, where + ".", "kind"), where + ".kind");

    InitialCondition ic;
    if (kind == "zero") {
        ic = InitialCondition::zero();
        reject_unknown_keys(obj, where + ".", {"kind"});
    } else if (kind == "single_mode") {
        const nlohmann::json& mode = require_key(obj, where + ".", "mode");
        if (!mode.is_array() || mode.size() != 2 || !mode[0].is_number_integer() ||
            !mode[1].is_number_integer())
            throw ConfigValidationError("config key '" + where +
                                        ".mode' must be a pair of integers [m, n]");
        const int m = mode[0].get<int>();
        const int n = mode[1].get<int>();
        if (m < 1 || m > truncation || n < 1 || n > truncation)
            throw ConfigValidationError("config key '" + where +
                                        ".mode' must lie inside the truncation");
        double amp = 1.0;
        if (obj.contains("amplitude")) amp = as_number(obj["amplitude"], where + ".amplitude");
        if (!std::isfinite(amp))
            throw ConfigValidationError("config key '" + where + ".amplitude' must be finite");
        ic = InitialCondition::single_mode(m, n, amp);
        reject_unknown_keys(obj, where + ".", {"kind", "mode", "amplitude"});
    } else if (kind == "random") {
        double amp = 1.0;
        if (obj.contains("rng_amplitude"))
            amp = as_number(obj["rng_amplitude"], where + ".rng_amplitude");
        if (!std::isfinite(amp) || amp < 0.0)
            throw ConfigValidationError("config key '" + where +
                                        ".rng_amplitude' must be finite and >= 0");
        ic = InitialCondition::random(amp);
        reject_unknown_keys(obj, where + ".", {"kind", "rng_amplitude"});
    } else {
        throw ConfigValidationError("config key '" + where +
                                    ".kind' must be one of zero|single_mode|random");
    }
    return ic;
}

inline NoiseSpec parse_noise(const nlohmann::json& obj, int truncation) {
    if (!obj.is_object())
        throw ConfigValidationError("config key 'noise' must be an object");
    reject_unknown_keys(obj, "noise.", {"law", "c", "p", "gamma", "table"});
    const std::string law = as_string(require_key(obj, "noise.", "law"), "noise.law");

    double gamma = 0.5;
    if (obj.contains("gamma")) gamma = as_number(obj["gamma"], "noise.gamma");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ConfigValidationError("config key 'noise.gamma' must lie strictly in (0, 1)");

    if (law == "zero") {
        reject_unknown_keys(obj, "noise.", {"law", "gamma"});
        return NoiseSpec::zero(truncation, gamma);
    }
    if (law == "power") {
        reject_unknown_keys(obj, "noise.", {"law", "c", "p", "gamma"});
        const double c = as_number(require_key(obj, "noise.", "c"), "noise.c");
        const double p = as_number(require_key(obj, "noise.", "p"), "noise.p");
        if (!(c >= 0.0) || !std::isfinite(c))
            throw ConfigValidationError("config key 'noise.c' must be finite and >= 0");
        if (!std::isfinite(p))
            throw ConfigValidationError("config key 'noise.p' must be finite");
        return NoiseSpec::power(truncation, c, p, gamma);
    }
    if (law == "table") {
        reject_unknown_keys(obj, "noise.", {"law", "table", "gamma"});
        const nlohmann::json& tab = require_key(obj, "noise.", "table");
        if (!tab.is_array())
            throw ConfigValidationError("config key 'noise.table' must be an array");
        std::vector<double> values;
        values.reserve(tab.size());
        for (const auto& v : tab) values.push_back(as_number(v, "noise.table[]"));
        const auto need = static_cast<std::size_t>(truncation) * static_cast<std::size_t>(truncation);
        if (values.size() != need)
            throw ConfigValidationError("config key 'noise.table' must list N*N = " +
                                        std::to_string(need) + " amplitudes");
        for (double a : values)
            if (!std::isfinite(a) || a < 0.0)
                throw ConfigValidationError(
                    "config key 'noise.table' entries must be finite and >= 0");
        return NoiseSpec::from_table(truncation, std::move(values), gamma);
    }
    throw ConfigValidationError("config key 'noise.law' must be one of power|table|zero");
}

} // namespace detail

/// Parse and validate a configuration document; defaults are resolved so
/// the result is fully explicit.
inline RunConfig parse_config(const std::string& text) {
    const nlohmann::json doc = detail::parse_strict(text);
    if (!doc.is_object()) throw ConfigValidationError("config document must be a JSON object");

    detail::reject_unknown_keys(
        doc, "",
        {"nu", "r", "beta", "N", "dt", "t_end", "burn_in", "seed", "ensemble_size", "noise",
         "initial_condition", "initial_condition_2", "observables", "output_dir",
         "checkpoint_every", "snapshot_every"});

    RunConfig cfg;
    cfg.nu = detail::as_number(detail::require_key(doc, "", "nu"), "nu");
    cfg.r = detail::as_number(detail::require_key(doc, "", "r"), "r");
    cfg.beta = detail::as_number(detail::require_key(doc, "", "beta"), "beta");
    const std::uint64_t nt = detail::as_u64(detail::require_key(doc, "", "N"), "N");
    if (nt < 1 || nt > 4096) throw ConfigValidationError("config key 'N' must lie in [1, 4096]");
    cfg.truncation = static_cast<int>(nt);
    cfg.dt = detail::as_number(detail::require_key(doc, "", "dt"), "dt");
    cfg.t_end = detail::as_number(detail::require_key(doc, "", "t_end"), "t_end");
    cfg.seed = detail::as_u64(detail::require_key(doc, "", "seed"), "seed");
    cfg.ensemble_size =
        static_cast<std::size_t>(detail::as_u64(detail::require_key(doc, "", "ensemble_size"),
                                                "ensemble_size"));

    if (!(cfg.nu > 0.0)) throw ConfigValidationError("config key 'nu' must be > 0");
    if (!(cfg.r >= 0.0)) throw ConfigValidationError("config key 'r' must be >= 0");
    if (!(cfg.beta >= 0.0)) throw ConfigValidationError("config key 'beta' must be >= 0");
    if (!(cfg.dt > 0.0)) throw ConfigValidationError("config key 'dt' must be > 0");
    if (!(cfg.t_end > 0.0)) throw ConfigValidationError("config key 't_end' must be > 0");
    if (cfg.ensemble_size < 1)
        throw ConfigValidationError("config key 'ensemble_size' must be >= 1");

    cfg.burn_in = doc.contains("burn_in")
                      ? detail::as_number(doc["burn_in"], "burn_in")
                      : cfg.t_end / 5.0;
    if (!(cfg.burn_in >= 0.0) || !(cfg.burn_in < cfg.t_end))
        throw ConfigValidationError("config key 'burn_in' must satisfy 0 <= burn_in < t_end");

    cfg.noise = detail::parse_noise(detail::require_key(doc, "", "noise"), cfg.truncation);

    cfg.ic_a = doc.contains("initial_condition")
                   ? detail::parse_ic(doc["initial_condition"], "initial_condition",
                                      cfg.truncation)
                   : InitialCondition::zero();
    if (doc.contains("initial_condition_2"))
        cfg.ic_b = detail::parse_ic(doc["initial_condition_2"], "initial_condition_2",
                                    cfg.truncation);

    cfg.output_dir =
        doc.contains("output_dir") ? detail::as_string(doc["output_dir"], "output_dir") : "out";
    if (cfg.output_dir.empty())
        throw ConfigValidationError("config key 'output_dir' must not be empty");

    cfg.checkpoint_every =
        doc.contains("checkpoint_every") ? detail::as_u64(doc["checkpoint_every"],
                                                          "checkpoint_every")
                                         : 0;
    if (doc.contains("snapshot_every")) {
        cfg.snapshot_every = detail::as_u64(doc["snapshot_every"], "snapshot_every");
        if (cfg.snapshot_every == 0)
            throw ConfigValidationError("config key 'snapshot_every' must be >= 1");
    } else {
        const long long every = std::llround(0.1 / cfg.dt);
        cfg.snapshot_every = every < 1 ? 1 : static_cast<std::uint64_t>(every);
    }

    // observables: enstrophy and energy are always computed; coeff_m_n
    // entries define the coefficient slice, with (1,1) always first.
    const ModeTable table(cfg.truncation);
    cfg.slice_modes = {table.k_of(1, 1)};
    std::vector<std::string> names = {"enstrophy", "energy", "coeff_1_1"};
    if (doc.contains("observables")) {
        const nlohmann::json& obs = doc["observables"];
        if (!obs.is_array())
            throw ConfigValidationError("config key 'observables' must be an array of names");
        for (const auto& entry : obs) {
            const std::string name = detail::as_string(entry, "observables[]");
            if (name == "enstrophy" || name == "energy" || name == "coeff_1_1") continue;
            int m = 0, n = 0, consumed = 0;
            if (std::sscanf(name.c_str(), "coeff_%d_%d%n", &m, &n, &consumed) == 2 &&
                consumed == static_cast<int>(name.size()) && m > 0 && n > 0) {
                if (m < 1 || m > cfg.truncation || n < 1 || n > cfg.truncation)
                    throw ConfigValidationError("config observable '" + name +
                                                "' lies outside the truncation");
                const std::size_t k = table.k_of(m, n);
                if (std::find(cfg.slice_modes.begin(), cfg.slice_modes.end(), k) ==
                    cfg.slice_modes.end()) {
                    cfg.slice_modes.push_back(k);
                    names.push_back(name);
                }
                continue;
            }
            throw ConfigValidationError("config observable '" + name +
                                        "' is not recognized (enstrophy|energy|coeff_m_n)");
        }
    }
    cfg.observables = std::move(names);
    return cfg;
}

namespace detail {

inline nlohmann::json ic_to_json(const InitialCondition& ic) {
    switch (ic.kind) {
    case InitialCondition::Kind::SingleMode:
        return {{"kind", "single_mode"},
                {"mode", {ic.mode_m, ic.mode_n}},
                {"amplitude", ic.amplitude}};
    case InitialCondition::Kind::Random:
        return {{"kind", "random"}, {"rng_amplitude", ic.rng_amplitude}};
    case InitialCondition::Kind::Zero:
    default:
        return {{"kind", "zero"}};
    }
}

inline nlohmann::json noise_to_json(const NoiseSpec& spec) {
    switch (spec.law) {
    case NoiseSpec::Law::Power:
        return {{"law", "power"}, {"c", spec.c}, {"p", spec.p}, {"gamma", spec.gamma}};
    case NoiseSpec::Law::Table:
        return {{"law", "table"}, {"table", spec.table}, {"gamma", spec.gamma}};
    case NoiseSpec::Law::Zero:
    default:
        return {{"law", "zero"}, {"gamma", spec.gamma}};
    }
}

} // namespace detail

/// Resolved-config echo; parsing it back reproduces the identical run.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j{{"nu", cfg.nu},
                     {"r", cfg.r},
                     {"beta", cfg.beta},
                     {"N", cfg.truncation},
                     {"dt", cfg.dt},
                     {"t_end", cfg.t_end},
                     {"burn_in", cfg.burn_in},
                     {"seed", cfg.seed},
                     {"ensemble_size", cfg.ensemble_size},
                     {"noise", detail::noise_to_json(cfg.noise)},
                     {"initial_condition", detail::ic_to_json(cfg.ic_a)},
                     {"observables", cfg.observables},
                     {"output_dir", cfg.output_dir},
                     {"checkpoint_every", cfg.checkpoint_every},
                     {"snapshot_every", cfg.snapshot_every}};
    if (cfg.ic_b) j["initial_condition_2"] = detail::ic_to_json(*cfg.ic_b);
    return j;
}

} // namespace qgergo
