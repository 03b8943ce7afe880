#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qgergo/runner.hpp"

namespace {

unsigned env_threads() {
    const char* v = std::getenv("QG_ERGO_THREADS");
    if (!v || !*v) return 0;
    char* end = nullptr;
    const unsigned long n = std::strtoul(v, &end, 10);
    if (end == v || *end != '\0') return 0;
    return static_cast<unsigned>(n);
}

int fail(const std::exception& e) {
    std::cerr << "qg-ergo: " << qgergo::error_category(e) << ": " << e.what() << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral ensemble simulator and ergodicity laboratory for "
                 "stochastically forced large-scale flow"};
    app.require_subcommand(1);

    std::string config_path;
    std::string checkpoint_path;
    std::string output_dir;
    unsigned threads = env_threads();
    bool force = false;
    double t_end = 0.0;
    std::int64_t member = -1;

    CLI::App* run_cmd = app.add_subcommand("run", "simulate an ensemble and write artifacts");
    run_cmd->add_option("config", config_path, "JSON run configuration")->required();
    run_cmd->add_flag("--force", force, "run even when the noise is inadmissible");
    run_cmd->add_option("--output-dir", output_dir, "override the configured output directory");
    run_cmd->add_option("--threads", threads,
                        "worker threads (default: QG_ERGO_THREADS, else all cores)");

    CLI::App* check_cmd =
        app.add_subcommand("check", "evaluate the uniqueness/ergodicity conditions only");
    check_cmd->add_option("config", config_path, "JSON run configuration")->required();

    CLI::App* resume_cmd =
        app.add_subcommand("resume", "continue one member from a checkpoint");
    resume_cmd->add_option("checkpoint", checkpoint_path, "binary checkpoint file")->required();
    resume_cmd->add_option("--t-end", t_end, "new end time")->required();
    resume_cmd->add_option("--member", member,
                           "member id (default: parsed from the checkpoint filename)");
    resume_cmd->add_option("--output-dir", output_dir, "where to write the resumed artifacts");
    resume_cmd->add_flag("--force", force, "resume even when the noise is inadmissible");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run_cmd)) {
            const qgergo::RunConfig cfg =
                qgergo::parse_config(qgergo::read_text_file(config_path));
            qgergo::RunOptions opts;
            opts.force = force;
            opts.output_dir = output_dir;
            opts.threads = threads;
            const qgergo::RunOutcome out = qgergo::run(cfg, opts);
            std::cout << "wrote " << out.output_dir << " (" << out.members.size()
                      << " members)\n";
            if (out.ergodicity) {
                bool agree = true;
                for (const auto& o : out.ergodicity->observables)
                    agree = agree && o.birkhoff_pass;
                std::cout << "birkhoff agreement: " << (agree ? "pass" : "fail") << "\n";
            }
            return 0;
        }
        if (app.got_subcommand(check_cmd)) {
            const qgergo::RunConfig cfg =
                qgergo::parse_config(qgergo::read_text_file(config_path));
            const qgergo::CheckOutcome out = qgergo::check(cfg);
            std::cout << out.text;
            if (!out.conditions.admissible) {
                const std::string which = qgergo::first_failed_condition(out.conditions);
                std::cerr << "qg-ergo: theorem_condition_failed:" << which
                          << ": noise fails uniqueness condition " << which << "\n";
                return 1;
            }
            return 0;
        }
        qgergo::ResumeOptions opts;
        opts.t_end = t_end;
        if (member >= 0) opts.member = static_cast<std::size_t>(member);
        opts.output_dir = output_dir;
        opts.force = force;
        const qgergo::RunOutcome out = qgergo::resume(checkpoint_path, opts);
        std::cout << "wrote " << out.output_dir << "\n";
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}
