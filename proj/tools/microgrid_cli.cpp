#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "microgrid/pipeline.hpp"

namespace mp = microgrid::pipeline;

namespace {

struct Flags {
    std::string config, scenarios, profiles, schedules, out = "out";
    std::uint64_t seed = 42;
    std::size_t count = 187;
    double tail = 0.05;
    unsigned jobs = 0;
    double gap = 1e-4;
    double time_limit = 60.0;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key = value configuration file (defaults when omitted)");
    auto* file = cmd->add_option("--scenarios", f.scenarios, "scenario CSV");
    auto* seed = cmd->add_option("--seed", f.seed, "seed for synthetic scenarios");
    cmd->add_option("--count", f.count, "number of synthetic scenarios");
    cmd->add_option("--profiles", f.profiles, "base profile CSV for synthetic scenarios");
    file->excludes(seed);
    cmd->add_option("--out", f.out, "output directory");
}

void add_solver(CLI::App* cmd, Flags& f) {
    cmd->add_option("--jobs", f.jobs, "worker threads (0 = all cores)");
    cmd->add_option("--gap", f.gap, "relative optimality gap")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--time-limit", f.time_limit, "per-scenario solver time limit in seconds")
        ->check(CLI::PositiveNumber);
}

mp::RunManifest manifest(const Flags& f) {
    mp::RunManifest m;
    if (!f.config.empty()) m.config_path = f.config;
    if (!f.scenarios.empty()) m.scenario_path = f.scenarios;
    if (!f.profiles.empty()) m.profiles_path = f.profiles;
    if (!f.schedules.empty()) m.schedule_dir = f.schedules;
    m.seed = f.seed;
    m.count = f.count;
    m.output_dir = f.out;
    m.tail_fraction = f.tail;
    m.jobs = f.jobs;
    m.solve.optimality_gap = f.gap;
    m.solve.time_limit = f.time_limit;
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Day-ahead dispatch and curtailment risk for an islanded PV/battery/diesel microgrid"};
    app.require_subcommand(1);
    Flags f;

    auto* schedule = app.add_subcommand("schedule", "solve one day-ahead schedule per scenario");
    add_common(schedule, f);
    add_solver(schedule, f);

    auto* risk = app.add_subcommand("risk", "per-segment VaR/cVaR of curtailment across scenarios");
    add_common(risk, f);
    add_solver(risk, f);
    risk->add_option("--tail", f.tail, "tail fraction")->check(CLI::Range(0.0, 1.0));
    risk->add_option("--schedules", f.schedules, "read schedules from this directory instead of solving");

    auto* validate = app.add_subcommand("validate", "check schedule CSVs against every constraint");
    add_common(validate, f);
    validate->add_option("--schedules", f.schedules, "directory of schedule CSVs")->required();

    auto* generate = app.add_subcommand("generate", "write a synthetic scenario set");
    generate->add_option("--config", f.config, "configuration file");
    generate->add_option("--seed", f.seed, "seed");
    generate->add_option("--count", f.count, "number of scenarios");
    generate->add_option("--profiles", f.profiles, "base profile CSV");
    generate->add_option("--out", f.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mp::kInputError;
    }

    const auto m = manifest(f);
    if (*schedule) return mp::cmd_schedule(m, std::cout, std::cerr);
    if (*risk) return mp::cmd_risk(m, std::cout, std::cerr);
    if (*validate) return mp::cmd_validate(m, std::cout, std::cerr);
    return mp::cmd_generate(m, std::cout, std::cerr);
}
