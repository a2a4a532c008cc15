// Batch pipeline behind the command-line tool: scenarios -> day-ahead
// schedules -> loss matrix -> risk report -> CSV artifacts.
//
// Exit codes: 0 success, 1 bad input or missing artifacts, 2 priority demand
// could not be served in some scenario, 3 schedule validation failed.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "microgrid/risk.hpp"
#include "microgrid/scenario_io.hpp"
#include "microgrid/scheduler.hpp"

namespace microgrid::pipeline {

enum ExitCode : int { kOk = 0, kInputError = 1, kPriorityShortfall = 2, kValidationFailed = 3 };

struct RunManifest {
    std::optional<std::filesystem::path> config_path;     // defaults when absent
    std::optional<std::filesystem::path> scenario_path;   // otherwise synthetic
    std::optional<std::filesystem::path> profiles_path;   // base profiles for synthetic runs
    std::optional<std::filesystem::path> schedule_dir;    // risk/validate: read schedules from here
    std::uint64_t seed = 42;
    std::size_t count = 187;
    std::filesystem::path output_dir = "out";
    double tail_fraction = 0.05;
    unsigned jobs = 0;  // 0 = hardware concurrency
    SolveOptions solve;
};

struct ScenarioOutcome {
    std::optional<Schedule> schedule;
    std::vector<std::size_t> shortfall_segments;  // set when priority demand was unservable
    std::string error;                            // any other failure
};

struct BatchResult {
    std::vector<DispatchProblem> problems;
    std::vector<ScenarioOutcome> outcomes;  // aligned with problems, in scenario order
};

/// Solves every scenario on a pool of `jobs` workers. Results are stored by
/// scenario position, so output is independent of the worker count.
BatchResult solve_all(const MicrogridConfig& config, const io::ScenarioSet& scenarios, const SolveOptions& options,
                      unsigned jobs);

MicrogridConfig manifest_config(const RunManifest& manifest);
io::ScenarioSet manifest_scenarios(const RunManifest& manifest, const TimeGrid& grid);

std::string schedule_file_name(const std::string& scenario_id);
std::string summary_csv(const BatchResult& batch);

int cmd_schedule(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_risk(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_validate(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_generate(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Console summary of a risk report.
std::string risk_console_table(const risk::RiskReport& report);

}  // namespace microgrid::pipeline
