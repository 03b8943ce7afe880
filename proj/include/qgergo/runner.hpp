#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qgergo/checkpoint.hpp"
#include "qgergo/config.hpp"
#include "qgergo/ergodicity.hpp"

// Orchestration from a parsed RunConfig to a directory of artifacts:
//
//   resolved_config.json   the config with every default filled in; feeding
//                          it back through `run` reproduces the run
//   timeseries.csv         t,member,enstrophy,energy,coeff_m_n...
//   report.json            condition report plus ergodicity diagnostics
//   checkpoints/           member_<id>_step_<step>.bin during the run and
//                          member_<id>_final.bin at the end
//   metadata.json          timestamps and host facts -- the only file allowed
//                          to differ between two identical runs

namespace qgergo {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixed-format float for the CSV: round-trips exactly, stable across runs.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

namespace detail {

inline nlohmann::json json_of(const Verdict& v) {
    return {{"pass", v.pass}, {"reason", v.reason}};
}

inline nlohmann::json json_of(const SummabilityReport& r) {
    return {{"convergent", r.convergent},
            {"method", r.method},
            {"partial_sum", r.partial_sum},
            {"tail_bound", r.tail_bound}};
}

inline nlohmann::json json_of(const TraceReport& r) {
    return {{"truncated", r.truncated}, {"tail_estimate", r.tail_estimate}};
}

inline nlohmann::json json_of(const ImageConditionReport& r) {
    return {{"pass", r.pass},
            {"t", r.t},
            {"max_ratio", r.max_ratio},
            {"argmax", r.argmax},
            {"tail_decreasing", r.tail_decreasing},
            {"reason", r.reason}};
}

inline nlohmann::json json_of(const ConditionReport& r) {
    nlohmann::json image = nlohmann::json::array();
    for (const auto& img : r.image) image.push_back(json_of(img));
    return {{"summability", json_of(r.summability)},
            {"trace", json_of(r.trace)},
            {"hs_value", r.hs_value},
            {"hs_tail_estimate", r.hs_tail_estimate},
            {"condition_i", json_of(r.hs_finite)},
            {"condition_ii", image},
            {"condition_iii", json_of(r.injectivity)},
            {"admissible", r.admissible}};
}

inline nlohmann::json json_of(const MeanStderr& m) {
    return {{"mean", m.mean}, {"std_error", m.std_error}, {"n", m.n}};
}

inline nlohmann::json json_of(const KsResult& k) {
    return {{"statistic", k.statistic}, {"critical", k.critical}, {"level", k.level},
            {"pass", k.pass}};
}

inline nlohmann::json json_of(const Histogram& h) {
    return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}, {"mass", h.mass}};
}

inline nlohmann::json json_of(const GroupCurve& c) {
    return {{"mean", c.mean}, {"std_error", c.std_error}};
}

inline nlohmann::json json_of(const MomentTrace& m) {
    return {{"mean", m.mean},
            {"running_mean", m.running_mean},
            {"sup", m.sup},
            {"stabilization_ratio", m.stabilization_ratio},
            {"bounded", m.bounded}};
}

template <typename T>
nlohmann::json json_pair(const std::array<T, 2>& a) {
    return nlohmann::json::array({json_of(a[0]), json_of(a[1])});
}

inline nlohmann::json json_of(const ObservableReport& o) {
    return {{"name", o.name},
            {"member_time_avg", o.member_time_avg},
            {"time_avg", json_pair(o.time_avg)},
            {"terminal_avg", json_pair(o.terminal_avg)},
            {"birkhoff_discrepancy", o.birkhoff_discrepancy},
            {"birkhoff_tolerance", o.birkhoff_tolerance},
            {"birkhoff_pass", o.birkhoff_pass},
            {"cross_ic_discrepancy", o.cross_ic_discrepancy},
            {"cross_ic_tolerance", o.cross_ic_tolerance},
            {"cross_ic_pass", o.cross_ic_pass},
            {"ks", json_of(o.ks)},
            {"terminal_hist", json_pair(o.terminal_hist)},
            {"ensemble_curve", json_pair(o.ensemble_curve)},
            {"running_time_avg", o.running_time_avg}};
}

inline nlohmann::json json_of(const ErgodicReport& r) {
    nlohmann::json obs = nlohmann::json::array();
    for (const auto& o : r.observables) obs.push_back(json_of(o));
    return {{"degenerate", r.degenerate},
            {"members_per_group", r.members_per_group},
            {"times", r.times},
            {"times_running", r.times_running},
            {"observables", obs},
            {"moments", json_pair(r.moments)},
            {"moments_pooled", json_of(r.moments_pooled)},
            {"indicator_threshold", r.indicator_threshold}};
}

} // namespace detail

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path.string());
    return std::move(ss).str();
}

/// CSV of all member series, ordered by (member, time).  Header:
/// t,member,enstrophy,energy followed by one coeff_m_n column per slice mode.
inline std::string timeseries_csv(const std::vector<MemberSeries>& members,
                                  const ModeTable& table,
                                  const std::vector<std::size_t>& slice_modes) {
    std::string csv = "t,member,enstrophy,energy";
    for (std::size_t k : slice_modes) {
        const ModeIndex mi = table.mode(k);
        csv += ",coeff_" + std::to_string(mi.m) + "_" + std::to_string(mi.n);
    }
    csv += "\n";
    for (const MemberSeries& ms : members) {
        for (std::size_t i = 0; i < ms.t.size(); ++i) {
            csv += format_g17(ms.t[i]);
            csv += ',';
            csv += std::to_string(ms.member);
            csv += ',';
            csv += format_g17(ms.enstrophy[i]);
            csv += ',';
            csv += format_g17(ms.energy[i]);
            for (double c : ms.slice[i]) {
                csv += ',';
                csv += format_g17(c);
            }
            csv += '\n';
        }
    }
    return csv;
}

inline std::string iso8601_utc_now() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

struct RunOptions {
    bool force = false;      ///< run even when the noise is inadmissible
    std::string output_dir;  ///< overrides the config's output_dir when non-empty
    unsigned threads = 0;    ///< 0 = hardware concurrency
};

struct RunOutcome {
    std::string output_dir;
    ConditionReport conditions;
    std::optional<ErgodicReport> ergodicity; ///< set for two-IC ensembles
    std::vector<MemberSeries> members;
};

/// Execute a configured run: condition gate, ensemble simulation, the
/// two-initial-condition comparison when configured, and all output files.
inline RunOutcome run(const RunConfig& cfg, const RunOptions& opts = {}) {
    namespace fs = std::filesystem;
    const fs::path out_dir =
        opts.output_dir.empty() ? fs::path(cfg.output_dir) : fs::path(opts.output_dir);
    const fs::path ckpt_dir = out_dir / "checkpoints";

    RunOutcome outcome;
    outcome.output_dir = out_dir.string();
    outcome.conditions = evaluate_conditions(cfg.noise, cfg.nu);
    if (!outcome.conditions.admissible && !opts.force) {
        const std::string which = first_failed_condition(outcome.conditions);
        throw AdmissibilityError(which, "noise fails uniqueness condition " + which);
    }

    std::error_code ec;
    fs::create_directories(ckpt_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + ckpt_dir.string() + ": " +
                      ec.message());

    write_text_file(out_dir / "resolved_config.json", config_to_json(cfg).dump(2) + "\n");

    const ModeTable table(static_cast<std::size_t>(cfg.truncation));
    const auto checkpoint_sink = [&ckpt_dir, &cfg](const FlowState& st, std::size_t member) {
        const fs::path p = ckpt_dir / ("member_" + std::to_string(member) + "_step_" +
                                       std::to_string(st.step) + ".bin");
        save_checkpoint(p.string(), st, cfg.seed);
    };

    nlohmann::json report;
    report["conditions"] = detail::json_of(outcome.conditions);

    std::vector<MemberSeries> members;
    if (cfg.ic_b && cfg.ensemble_size >= 2) {
        LabConfig lab;
        lab.params = cfg.params();
        lab.noise = cfg.noise;
        lab.ic_a = cfg.ic_a;
        lab.ic_b = *cfg.ic_b;
        lab.members = cfg.ensemble_size;
        lab.t_end = cfg.t_end;
        lab.burn_in = cfg.burn_in;
        lab.seed = cfg.seed;
        lab.snapshot_every = cfg.snapshot_every;
        lab.threads = opts.threads;
        lab.force = true; // the gate above already ruled
        lab.slice_modes = cfg.slice_modes;
        lab.checkpoint_every = cfg.checkpoint_every;
        lab.on_checkpoint = checkpoint_sink;
        LabRun lr = birkhoff_experiment_full(lab);
        members = std::move(lr.members);
        report["ergodicity"] = detail::json_of(lr.report);
        outcome.ergodicity = std::move(lr.report);
    } else {
        SimulateOptions opt;
        opt.t_end = cfg.t_end;
        opt.snapshot_every = cfg.snapshot_every;
        opt.slice_modes = cfg.slice_modes;
        opt.checkpoint_every = cfg.checkpoint_every;
        opt.on_checkpoint = checkpoint_sink;
        std::vector<SpectralField> ics;
        ics.push_back(make_initial_field(cfg.ic_a, table, cfg.seed, 0));
        if (cfg.ic_b) ics.push_back(make_initial_field(*cfg.ic_b, table, cfg.seed, 1));
        members = run_ensemble(cfg.params(), cfg.noise, ics, cfg.ensemble_size, cfg.seed,
                               opt, opts.threads);
        report["ergodicity"] = nullptr;
    }

    write_text_file(out_dir / "timeseries.csv", timeseries_csv(members, table, cfg.slice_modes));
    for (const MemberSeries& ms : members) {
        const fs::path p = ckpt_dir / ("member_" + std::to_string(ms.member) + "_final.bin");
        save_checkpoint(p.string(), ms.final_state, cfg.seed);
    }

    report["run"] = {{"members", members.size()},
                     {"snapshots", members.empty() ? 0 : members.front().t.size()},
                     {"t_end", cfg.t_end}};
    write_text_file(out_dir / "report.json", report.dump(2) + "\n");

    nlohmann::json meta;
    meta["created"] = iso8601_utc_now();
    meta["generator"] = "philox4x64-10";
    meta["threads"] = resolve_threads(opts.threads);
    write_text_file(out_dir / "metadata.json", meta.dump(2) + "\n");

    outcome.members = std::move(members);
    return outcome;
}

struct CheckOutcome {
    ConditionReport conditions;
    std::string text;
};

/// Evaluate the uniqueness/ergodicity hypotheses without running anything.
inline CheckOutcome check(const RunConfig& cfg) {
    CheckOutcome out;
    out.conditions = evaluate_conditions(cfg.noise, cfg.nu);
    out.text = format_condition_report(out.conditions);
    return out;
}

/// Member id encoded in a checkpoint filename ("member_<id>_...").
inline std::optional<std::size_t> member_from_filename(const std::string& name) {
    static constexpr char prefix[] = "member_";
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    std::size_t pos = sizeof prefix - 1;
    if (pos >= name.size() || !std::isdigit(static_cast<unsigned char>(name[pos])))
        return std::nullopt;
    std::size_t id = 0;
    while (pos < name.size() && std::isdigit(static_cast<unsigned char>(name[pos]))) {
        id = id * 10 + static_cast<std::size_t>(name[pos] - '0');
        ++pos;
    }
    return id;
}

/// A checkpoint lives in <output_dir>/checkpoints/; the config echo sits one
/// level up.  Also accepts a checkpoint placed directly next to the echo.
inline std::filesystem::path find_resolved_config(const std::filesystem::path& ckpt) {
    namespace fs = std::filesystem;
    const fs::path dir = ckpt.has_parent_path() ? ckpt.parent_path() : fs::path(".");
    for (const fs::path& cand :
         {dir / "resolved_config.json", dir.parent_path() / "resolved_config.json"}) {
        std::error_code ec;
        if (fs::exists(cand, ec)) return cand;
    }
    throw IoError("no resolved_config.json found next to checkpoint " + ckpt.string());
}

struct ResumeOptions {
    double t_end = 0;                  ///< new horizon; must be at the checkpoint or later
    std::optional<std::size_t> member; ///< default: parsed from the filename, else 0
    std::string output_dir;            ///< default: resume-member-<id> next to the config echo
    unsigned threads = 0;
    bool force = false;
};

/// Continue one member from a checkpoint to a new horizon.  The trajectory
/// is bit-identical to an uninterrupted run because the noise is keyed by
/// absolute step and the state is stored exactly.
inline RunOutcome resume(const std::string& checkpoint_path, const ResumeOptions& opts) {
    namespace fs = std::filesystem;
    if (!(opts.t_end > 0.0))
        throw std::invalid_argument("resume: t_end must be positive");

    CheckpointData data = load_checkpoint(checkpoint_path);

    const fs::path cfg_path = find_resolved_config(checkpoint_path);
    const RunConfig cfg = parse_config(read_text_file(cfg_path));
    if (static_cast<std::size_t>(cfg.truncation) != data.state.omega.truncation())
        throw CheckpointError("checkpoint truncation " +
                              std::to_string(data.state.omega.truncation()) +
                              " does not match config N=" + std::to_string(cfg.truncation));
    if (cfg.seed != data.seed)
        throw CheckpointError("checkpoint seed disagrees with the resolved config");
    if (opts.t_end < data.state.t - 1e-12)
        throw std::invalid_argument("resume: t_end earlier than the checkpoint time");

    const std::size_t member =
        opts.member ? *opts.member
                    : member_from_filename(fs::path(checkpoint_path).filename().string())
                          .value_or(0);
    std::size_t group = 0;
    if (cfg.ic_b && cfg.ensemble_size > 0 && member >= cfg.ensemble_size) group = 1;

    RunOutcome outcome;
    outcome.conditions = evaluate_conditions(cfg.noise, cfg.nu);
    if (!outcome.conditions.admissible && !opts.force) {
        const std::string which = first_failed_condition(outcome.conditions);
        throw AdmissibilityError(which, "noise fails uniqueness condition " + which);
    }

    const fs::path out_dir =
        opts.output_dir.empty()
            ? cfg_path.parent_path() / ("resume-member-" + std::to_string(member))
            : fs::path(opts.output_dir);
    const fs::path ckpt_dir = out_dir / "checkpoints";
    std::error_code ec;
    fs::create_directories(ckpt_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + ckpt_dir.string() + ": " +
                      ec.message());
    outcome.output_dir = out_dir.string();

    const std::uint64_t from_step = data.state.step;
    const double from_t = data.state.t;

    Integrator integ(cfg.params(), cfg.noise);
    SimulateOptions opt;
    opt.t_end = opts.t_end;
    opt.snapshot_every = cfg.snapshot_every;
    opt.slice_modes = cfg.slice_modes;
    opt.checkpoint_every = cfg.checkpoint_every;
    opt.on_checkpoint = [&ckpt_dir, &data](const FlowState& st, std::size_t m) {
        const fs::path p = ckpt_dir / ("member_" + std::to_string(m) + "_step_" +
                                       std::to_string(st.step) + ".bin");
        save_checkpoint(p.string(), st, data.seed);
    };

    MemberSeries ms;
    try {
        ms = simulate_member(integ, std::move(data.state), member, group, data.seed, opt);
    } catch (const InstabilityError& e) {
        throw MemberFailure(member, e.what(), true);
    }

    const ModeTable table(static_cast<std::size_t>(cfg.truncation));
    write_text_file(out_dir / "resolved_config.json", read_text_file(cfg_path));
    write_text_file(out_dir / "timeseries.csv", timeseries_csv({ms}, table, cfg.slice_modes));
    save_checkpoint((ckpt_dir / ("member_" + std::to_string(member) + "_final.bin")).string(),
                    ms.final_state, data.seed);

    nlohmann::json report;
    report["conditions"] = detail::json_of(outcome.conditions);
    report["ergodicity"] = nullptr;
    report["run"] = {{"members", 1}, {"snapshots", ms.t.size()}, {"t_end", opts.t_end}};
    report["resume"] = {{"member", member}, {"from_step", from_step}, {"from_t", from_t}};
    write_text_file(out_dir / "report.json", report.dump(2) + "\n");

    nlohmann::json meta;
    meta["created"] = iso8601_utc_now();
    meta["generator"] = "philox4x64-10";
    meta["threads"] = 1;
    meta["resumed_from"] = fs::path(checkpoint_path).string();
    write_text_file(out_dir / "metadata.json", meta.dump(2) + "\n");

    outcome.members.push_back(std::move(ms));
    return outcome;
}

/// Stable machine-readable failure category for the command line interface.
inline std::string error_category(const std::exception& e) {
    if (dynamic_cast<const ConfigParseError*>(&e)) return "config_parse";
    if (dynamic_cast<const ConfigValidationError*>(&e)) return "config_invalid";
    if (auto* a = dynamic_cast<const AdmissibilityError*>(&e))
        return "theorem_condition_failed:" + a->condition();
    if (auto* m = dynamic_cast<const MemberFailure*>(&e))
        return m->instability() ? "instability" : "member_failed";
    if (dynamic_cast<const InstabilityError*>(&e)) return "instability";
    if (dynamic_cast<const CheckpointError*>(&e)) return "checkpoint_error";
    if (dynamic_cast<const IoError*>(&e)) return "io_error";
    if (dynamic_cast<const std::invalid_argument*>(&e) ||
        dynamic_cast<const std::domain_error*>(&e))
        return "config_invalid";
    return "internal_error";
}

} // namespace qgergo
