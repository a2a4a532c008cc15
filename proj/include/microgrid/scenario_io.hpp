// Scenario ingestion and generation, and CSV emission of schedules and risk
// reports.
//
// Scenario CSV (UTF-8, LF, '.' decimal, at most 6 fractional digits):
//
//     # optional comment lines
//     scenario_id,kind,s001,s002,...,s096
//     day-001,demand_kw,12.5,...
//     day-001,pv_kw,0,...
//
// Each scenario contributes one `demand_kw` and one `pv_kw` row.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "microgrid/risk.hpp"
#include "microgrid/types.hpp"

namespace microgrid::io {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ScenarioSource { file, synthetic };

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    ScenarioSource source = ScenarioSource::file;
    std::uint64_t seed = 0;  // synthetic only
    TimeGrid grid;
};

struct BaseProfiles {
    std::vector<double> demand_kw;
    std::vector<double> pv_kw;
};

struct GeneratorSpec {
    std::uint64_t seed = 42;
    std::size_t scenario_count = 187;
    std::vector<double> base_demand_profile;
    std::vector<double> base_pv_profile;
    double demand_spread = 0.25;
    double pv_spread = 0.20;
    double heavy_tail_share = 0.15;
};

/// Identifier of the pseudo-random generator, recorded in generated files.
inline constexpr const char* kPrngName = "splitmix64";

/// SplitMix64; the per-scenario stream is seeded with mix(seed + (index + 1) * golden).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    std::uint64_t next();
    double uniform();  // [0, 1), 53 bits
    double normal();   // Box-Muller, cosine branch only
    static std::uint64_t mix(std::uint64_t z);

private:
    std::uint64_t state_;
};

/// Piecewise-linear demand for ten homes (night trough, morning ramp,
/// evening peak) and a PV bell for ten 4 kW rooftop systems peaking at 13:00,
/// sampled at segment midpoints.
BaseProfiles default_base_profiles(const TimeGrid& grid);
BaseProfiles read_base_profiles(const std::filesystem::path& path, const TimeGrid& grid);
std::string base_profiles_csv(const BaseProfiles& profiles);

GeneratorSpec default_generator_spec(const TimeGrid& grid);

ScenarioSet generate_scenarios(const GeneratorSpec& spec, const TimeGrid& grid);

ScenarioSet parse_scenarios(const std::string& text, const TimeGrid& grid);
ScenarioSet read_scenarios(const std::filesystem::path& path, const TimeGrid& grid);
std::string scenarios_csv(const ScenarioSet& set);

std::string schedule_csv(const Schedule& schedule);
void write_schedule_csv(const Schedule& schedule, const std::filesystem::path& path);
/// Rebuilds a Schedule from its CSV; served load and the cost breakdown are
/// derived against `problem`.
Schedule read_schedule_csv(const std::filesystem::path& path, const DispatchProblem& problem);

/// Writes var_cvar_per_segment.csv, curtail_instances.csv, std_per_segment.csv
/// and active_scenarios.csv into `dir`.
void write_risk_csv(const risk::RiskReport& report, const std::filesystem::path& dir);
risk::RiskReport read_risk_csv(const std::filesystem::path& dir);

std::string segment_column(std::size_t index, std::size_t count);  // 0-based -> "s001"
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace microgrid::io
