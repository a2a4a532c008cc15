#include "microgrid/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "microgrid/config.hpp"
#include "microgrid/format.hpp"

namespace microgrid::pipeline {
namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string join_segments(const std::vector<std::size_t>& segs) {
    std::string s;
    for (std::size_t i = 0; i < segs.size(); ++i) s += (i ? "," : "") + std::to_string(segs[i] + 1);
    return s;
}

// Writes schedules and summary; returns the exit code of the schedule step.
int write_batch(const BatchResult& batch, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
    ensure_dir(out_dir);
    int code = kOk;
    for (std::size_t i = 0; i < batch.problems.size(); ++i) {
        const auto& o = batch.outcomes[i];
        const auto& id = batch.problems[i].scenario.id;
        if (o.schedule) {
            io::write_schedule_csv(*o.schedule, out_dir / schedule_file_name(id));
        } else if (!o.shortfall_segments.empty()) {
            err << "priority shortfall: scenario " << id << " segments " << join_segments(o.shortfall_segments)
                << "\n";
            code = std::max(code, static_cast<int>(kPriorityShortfall));
        } else {
            err << "error: scenario " << id << ": " << o.error << "\n";
            code = kInputError;
        }
    }
    io::write_text(out_dir / "summary.csv", summary_csv(batch));
    const auto solved = std::count_if(batch.outcomes.begin(), batch.outcomes.end(),
                                      [](const ScenarioOutcome& o) { return o.schedule.has_value(); });
    out << "solved " << solved << " of " << batch.problems.size() << " scenarios into " << out_dir.string() << "\n";
    return code;
}

}  // namespace

std::string schedule_file_name(const std::string& scenario_id) { return "schedule_" + scenario_id + ".csv"; }

BatchResult solve_all(const MicrogridConfig& config, const io::ScenarioSet& scenarios, const SolveOptions& options,
                      unsigned jobs) {
    BatchResult batch;
    const std::size_t n = scenarios.scenarios.size();
    batch.outcomes.resize(n);
    for (const auto& s : scenarios.scenarios) batch.problems.push_back(build_problem(config, s));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            auto& o = batch.outcomes[i];
            try {
                o.schedule = solve_day_ahead(batch.problems[i], options);
            } catch (const PriorityShortfall& e) {
                o.shortfall_segments = e.segments();
                if (o.shortfall_segments.empty()) o.error = e.what();
            } catch (const std::exception& e) {
                o.error = e.what();
            }
        }
    };
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return batch;
}

MicrogridConfig manifest_config(const RunManifest& m) {
    return m.config_path ? load_config(*m.config_path) : MicrogridConfig{};
}

io::ScenarioSet manifest_scenarios(const RunManifest& m, const TimeGrid& grid) {
    if (m.scenario_path) return io::read_scenarios(*m.scenario_path, grid);
    auto spec = io::default_generator_spec(grid);
    if (m.profiles_path) {
        auto base = io::read_base_profiles(*m.profiles_path, grid);
        spec.base_demand_profile = std::move(base.demand_kw);
        spec.base_pv_profile = std::move(base.pv_kw);
    }
    spec.seed = m.seed;
    spec.scenario_count = m.count;
    return io::generate_scenarios(spec, grid);
}

std::string summary_csv(const BatchResult& batch) {
    std::string out = "scenario_id,total_cost_usd,curtailed_kwh,segments_curtailed\n";
    for (std::size_t i = 0; i < batch.problems.size(); ++i) {
        const auto& o = batch.outcomes[i];
        if (!o.schedule) continue;
        const double dt = batch.problems[i].config.time.segment_hours;
        double kwh = 0.0;
        std::size_t segs = 0;
        for (const auto& d : o.schedule->decisions) {
            kwh += d.curtailment * dt;
            if (d.curtailment > risk::kCurtailThreshold) ++segs;
        }
        out += o.schedule->scenario_id + "," + format_double(o.schedule->cost.total) + "," + format_double(kwh) +
               "," + std::to_string(segs) + "\n";
    }
    return out;
}

int cmd_schedule(const RunManifest& m, std::ostream& out, std::ostream& err) {
    MicrogridConfig config;
    io::ScenarioSet scenarios;
    try {
        config = manifest_config(m);
        require_full_day(config.time);
        scenarios = manifest_scenarios(m, config.time);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    try {
        const auto batch = solve_all(config, scenarios, m.solve, m.jobs);
        return write_batch(batch, m.output_dir, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
}

std::string risk_console_table(const risk::RiskReport& r) {
    std::ostringstream os;
    const std::size_t nt = r.cvar_per_segment.size();
    const std::size_t ns = r.scenario_ids.size();
    const bool any = std::any_of(r.cvar_per_segment.begin(), r.cvar_per_segment.end(),
                                 [](double v) { return v > risk::kCurtailThreshold; }) ||
                     !r.active_scenarios.empty();
    os << "scenarios            " << ns << "\n";
    os << "tail fraction        " << format_double(r.tail_fraction) << " (" << r.tail_scenarios
       << " whole scenarios)\n";
    if (!any) {
        os << "no curtailment risk\n";
        return os.str();
    }
    std::size_t zero = 0, arg = 0;
    for (std::size_t t = 0; t < nt; ++t) {
        if (r.cvar_per_segment[t] <= risk::kCurtailThreshold) ++zero;
        if (r.cvar_per_segment[t] > r.cvar_per_segment[arg]) arg = t;
    }
    const double pct = ns ? 100.0 * static_cast<double>(r.active_scenarios.size()) / static_cast<double>(ns) : 0.0;
    os << "segments with cVaR=0 " << zero << " of " << nt << "\n";
    os << "max cVaR             " << format_fixed(r.cvar_per_segment[arg], 4) << " kW at segment " << arg + 1
       << " (ratio " << format_fixed(r.cvar_ratio_per_segment[arg], 4) << ")\n";
    os << "active scenarios     " << r.active_scenarios.size() << " (" << format_fixed(pct, 1) << "%)\n";
    std::size_t worst = 0;
    for (auto c : r.curtail_instances_per_scenario) worst = std::max(worst, c);
    os << "max curtailed segs   " << worst << " per scenario\n";
    return os.str();
}

int cmd_risk(const RunManifest& m, std::ostream& out, std::ostream& err) {
    if (!(m.tail_fraction > 0.0 && m.tail_fraction < 1.0)) {
        err << "error: --tail must lie in (0, 1)\n";
        return kInputError;
    }
    MicrogridConfig config;
    io::ScenarioSet scenarios;
    try {
        config = manifest_config(m);
        require_full_day(config.time);
        scenarios = manifest_scenarios(m, config.time);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    std::vector<Schedule> schedules;
    std::vector<DispatchProblem> problems;
    try {
        if (m.schedule_dir) {
            for (const auto& s : scenarios.scenarios) {
                const auto path = *m.schedule_dir / schedule_file_name(s.id);
                if (!fs::exists(path)) {
                    err << "error: missing schedule " << path.string() << "\n";
                    return kInputError;
                }
                problems.push_back(build_problem(config, s));
                schedules.push_back(io::read_schedule_csv(path, problems.back()));
            }
        } else {
            const auto batch = solve_all(config, scenarios, m.solve, m.jobs);
            const int code = write_batch(batch, m.output_dir, out, err);
            if (code != kOk) return code;
            problems = batch.problems;
            for (const auto& o : batch.outcomes) schedules.push_back(*o.schedule);
        }
        const auto matrix = risk::build_loss_matrix(schedules, problems, m.tail_fraction);
        const auto report = risk::risk_report(matrix);
        io::write_risk_csv(report, m.output_dir);
        out << risk_console_table(report);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kOk;
}

int cmd_validate(const RunManifest& m, std::ostream& out, std::ostream& err) {
    if (!m.schedule_dir) {
        err << "error: validate needs a schedule directory\n";
        return kInputError;
    }
    MicrogridConfig config;
    io::ScenarioSet scenarios;
    try {
        config = manifest_config(m);
        scenarios = manifest_scenarios(m, config.time);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    std::map<std::string, const Scenario*> by_id;
    for (const auto& s : scenarios.scenarios) by_id[s.id] = &s;

    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(*m.schedule_dir, ec)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("schedule_", 0) == 0 && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    if (ec) {
        err << "error: cannot read " << m.schedule_dir->string() << ": " << ec.message() << "\n";
        return kInputError;
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        err << "error: no schedule files in " << m.schedule_dir->string() << "\n";
        return kInputError;
    }

    std::size_t bad = 0;
    for (const auto& path : files) {
        const auto stem = path.stem().string();
        const auto id = stem.substr(std::string("schedule_").size());
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            err << "error: no scenario " << id << " for " << path.string() << "\n";
            return kInputError;
        }
        try {
            const auto problem = build_problem(config, *it->second);
            const auto schedule = io::read_schedule_csv(path, problem);
            const auto violations = validate_schedule(schedule, problem);
            if (!violations.empty()) ++bad;
            for (const auto& v : violations)
                err << path.filename().string() << ": segment " << v.segment + 1 << ": " << v.constraint
                    << " violated by " << v.magnitude << (v.detail.empty() ? "" : " (" + v.detail + ")") << "\n";
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kInputError;
        }
    }
    out << "validated " << files.size() << " schedules, " << bad << " with violations\n";
    return bad ? kValidationFailed : kOk;
}

int cmd_generate(const RunManifest& m, std::ostream& out, std::ostream& err) {
    try {
        const auto config = manifest_config(m);
        auto set = manifest_scenarios(RunManifest{m.config_path, std::nullopt, m.profiles_path, std::nullopt, m.seed,
                                                  m.count, m.output_dir, m.tail_fraction, m.jobs, m.solve},
                                      config.time);
        ensure_dir(m.output_dir);
        const auto path = m.output_dir / "scenarios.csv";
        io::write_text(path, io::scenarios_csv(set));
        out << "wrote " << set.scenarios.size() << " scenarios to " << path.string() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kOk;
}

}  // namespace microgrid::pipeline
