// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "microgrid/battery.hpp"
#include "microgrid/pipeline.hpp"
#include "microgrid/risk.hpp"
#include "microgrid/scenario_io.hpp"
#include "microgrid/scheduler.hpp"

namespace fs = std::filesystem;
using namespace microgrid;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

struct ReferenceRun {
    std::vector<DispatchProblem> problems;
    std::vector<Schedule> schedules;
    std::size_t failed = 0;
};

const ReferenceRun& reference_run() {
    static const ReferenceRun run = [] {
        ReferenceRun r;
        const MicrogridConfig config;
        const auto set = io::read_scenarios(fs::path(MICROGRID_DATA_DIR) / "reference_scenarios_seed42.csv", config.time);
        auto batch = pipeline::solve_all(config, set, SolveOptions{}, 1);
        r.problems = batch.problems;
        for (auto& o : batch.outcomes) {
            if (o.schedule)
                r.schedules.push_back(std::move(*o.schedule));
            else
                ++r.failed;
        }
        return r;
    }();
    return run;
}

Outcome oracle_optimality() {
    const auto start = Clock::now();
    std::size_t worse = 0, invalid = 0, failures = 0;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
        std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        MicrogridConfig cfg;
        cfg.time.segment_count = 1 + rng() % 4;
        cfg.bess.unit_count = 1 + static_cast<int>(rng() % 2);
        cfg.bess.initial_energy_per_unit = std::round(cfg.bess.capacity_per_unit * (0.05 + 0.9 * u(rng)) * 4.0) / 4.0;
        const double capital[] = {10000.0, 1e5, 1e6, 1e7};
        cfg.bess.capital_cost = capital[rng() % 4];
        cfg.bess.initial_cycles = std::round(2000.0 * u(rng));
        if (rng() % 3 == 0) cfg.diesel.p_min = 1.0;
        Scenario s;
        s.id = "oracle-" + std::to_string(i);
        for (std::size_t t = 0; t < cfg.time.segment_count; ++t) {
            s.demand_total.push_back(std::round(1e3 * 18.0 * u(rng)) / 1e3);
            s.pv_generation.push_back(std::round(1e3 * 10.0 * u(rng) * u(rng)) / 1e3);
        }
        try {
            const auto problem = build_problem(cfg, s);
            const auto solved = solve_day_ahead(problem);
            const auto oracle = brute_force_oracle(problem, 0.25);
            const double excess = solved.cost.total - oracle.cost.total;
            worst_excess = std::max(worst_excess, excess);
            if (excess > 1e-6) ++worse;
            if (!validate_schedule(solved, problem).empty()) ++invalid;
        } catch (const std::exception& e) {
            std::cerr << "  instance " << i << ": " << e.what() << "\n";
            ++failures;
        }
    }
    const double elapsed = seconds_since(start);
    const bool pass = worse == 0 && invalid == 0 && failures == 0 && elapsed < 60.0;
    return {pass, "50 instances, max(solver - oracle) = " + fmt(worst_excess) + ", " + std::to_string(worse) +
                      " worse, " + std::to_string(invalid) + " invalid, " + std::to_string(failures) +
                      " errors, " + fmt(elapsed) + " s"};
}

Outcome constraint_residuals() {
    const auto& run = reference_run();
    double max_balance = 0.0;
    std::size_t violations = 0, soc_out = 0;
    for (std::size_t s = 0; s < run.schedules.size(); ++s) {
        const auto& p = run.problems[s];
        const auto& b = p.config.bess;
        violations += validate_schedule(run.schedules[s], p).size();
        for (std::size_t t = 0; t < p.segments(); ++t) {
            const auto& d = run.schedules[s].decisions[t];
            const double residual = p.scenario.demand_total[t] - d.curtailment - d.diesel_power - d.bess_power -
                                    (p.scenario.pv_generation[t] - d.pv_spill);
            max_balance = std::max(max_balance, std::abs(residual));
            if (d.soc_end < b.soc_abs_min || d.soc_end > b.soc_abs_max) ++soc_out;
        }
    }
    const bool pass = run.failed == 0 && run.schedules.size() == 187 && max_balance <= 1e-6 && violations == 0 &&
                      soc_out == 0;
    return {pass, std::to_string(run.schedules.size()) + " schedules, max balance residual " + fmt(max_balance) +
                      " kW, " + std::to_string(violations) + " violations, " + std::to_string(soc_out) +
                      " SOC excursions"};
}

Outcome degradation_algebra() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    bool endpoint = true;
    for (int i = 0; i < 10000; ++i) {
        const double n_max = 1.0 + 1e4 * u(rng);
        const double n = n_max * u(rng);
        const double gamma = 0.01 + 10.0 * u(rng);
        const double lambda = battery::capacity_loss_factor(n, n_max, gamma);
        worst = std::max(worst, std::abs(lambda * (gamma * (n_max - n) + n_max) / n_max - 1.0));
        if (battery::capacity_loss_factor(n_max, n_max, gamma) != 1.0) endpoint = false;
    }

    double telescope = 0.0;
    const auto& run = reference_run();
    for (std::size_t s = 0; s < run.schedules.size(); ++s) {
        const auto& b = run.problems[s].config.bess;
        const double dt = run.problems[s].config.time.segment_hours;
        auto state = battery::initial_state(b);
        double throughput = 0.0;
        for (const auto& d : run.schedules[s].decisions) {
            state = battery::soc_update(state, d.charge_power, d.discharge_power, dt, b).value();
            throughput += (d.charge_power + d.discharge_power) * dt;
        }
        const double closed = b.initial_cycles + 0.5 * throughput / b.fleet_capacity();
        telescope = std::max(telescope, std::abs(state.cycles - closed));
    }
    const bool pass = worst <= 1e-12 && endpoint && telescope <= 1e-12;
    return {pass, "identity residual " + fmt(worst) + " on 10000 triples, lambda(n_max)=1 " +
                      (endpoint ? "exact" : "inexact") + ", cycle telescoping residual " + fmt(telescope)};
}

Outcome cvar_correctness() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double tail_err = 0.0, shift_err = 0.0, scale_err = 0.0;
    std::size_t below_var = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 2 + rng() % 199;
        const std::size_t k = 1 + rng() % (n - 1);
        std::vector<double> losses(n);
        for (auto& v : losses) v = (rng() % 4 == 0) ? 0.0 : 50.0 * u(rng);
        const double tail = static_cast<double>(k) / static_cast<double>(n);

        std::vector<double> desc = losses;
        std::sort(desc.begin(), desc.end(), std::greater<>());
        const double mean = std::accumulate(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
                            static_cast<double>(k);
        const double cvar = risk::empirical_cvar(losses, tail).cvar;
        tail_err = std::max(tail_err, std::abs(cvar - mean));

        const double any_tail = 0.01 + 0.98 * u(rng);
        const double c = 100.0 * u(rng), scale = 5.0 * u(rng);
        const double base = risk::empirical_cvar(losses, any_tail).cvar;
        if (base < risk::empirical_var(losses, any_tail) - 1e-12 || cvar < risk::empirical_var(losses, tail) - 1e-12)
            ++below_var;
        std::vector<double> shifted = losses, scaled = losses;
        for (auto& v : shifted) v += c;
        for (auto& v : scaled) v *= scale;
        shift_err = std::max(shift_err, std::abs(risk::empirical_cvar(shifted, any_tail).cvar - (base + c)));
        scale_err = std::max(scale_err, std::abs(risk::empirical_cvar(scaled, any_tail).cvar - scale * base));
    }
    const bool pass = tail_err <= 1e-9 && below_var == 0 && shift_err <= 1e-9 && scale_err <= 1e-9;
    return {pass, "tail-mean error " + fmt(tail_err) + ", " + std::to_string(below_var) +
                      " cVaR<VaR, translation error " + fmt(shift_err) + ", homogeneity error " + fmt(scale_err)};
}

Outcome shortfall_consistency() {
    const auto& run = reference_run();
    double worst = 0.0;
    for (std::size_t s = 0; s < run.schedules.size(); ++s) {
        const auto& p = run.problems[s];
        for (std::size_t t = 0; t < p.segments(); ++t) {
            const auto& d = run.schedules[s].decisions[t];
            worst = std::max(worst, std::abs(risk::shortfall(p.net_load[t], d.bess_power, d.diesel_power) -
                                             d.curtailment));
        }
    }
    bool matrix_ok = true;
    try {
        risk::build_loss_matrix(run.schedules, run.problems, 0.05);
    } catch (const std::exception&) {
        matrix_ok = false;
    }
    return {worst <= 1e-6 && matrix_ok && !run.schedules.empty(),
            "max |shortfall - curtailment| = " + fmt(worst) + " kW over " + std::to_string(run.schedules.size()) +
                " scenarios"};
}

risk::RiskReport reference_report() {
    const auto& run = reference_run();
    return risk::risk_report(risk::build_loss_matrix(run.schedules, run.problems, 0.05));
}

Outcome midday_cvar() {
    const auto report = reference_report();
    const auto base = io::default_base_profiles(TimeGrid{});
    const double pv_peak = *std::max_element(base.pv_kw.begin(), base.pv_kw.end());
    const double cvar_max = *std::max_element(report.cvar_per_segment.begin(), report.cvar_per_segment.end());
    std::size_t run = 0, longest = 0, first = 0, best_first = 0;
    for (std::size_t t = 0; t < report.cvar_per_segment.size(); ++t) {
        const bool ok = base.pv_kw[t] >= 0.8 * pv_peak && report.cvar_per_segment[t] <= 0.05 * cvar_max;
        if (ok) {
            if (run == 0) first = t;
            ++run;
            if (run > longest) {
                longest = run;
                best_first = first;
            }
        } else {
            run = 0;
        }
    }
    return {longest >= 8 && cvar_max > 0.0,
            std::to_string(longest) + " consecutive near-peak-PV segments (from " + std::to_string(best_first + 1) +
                ") with cVaR <= 5% of daily max " + fmt(cvar_max) + " kW"};
}

Outcome curtailment_shape() {
    const auto report = reference_report();
    const double share =
        static_cast<double>(report.active_scenarios.size()) / static_cast<double>(report.scenario_ids.size());
    const auto worst = *std::max_element(report.curtail_instances_per_scenario.begin(),
                                         report.curtail_instances_per_scenario.end());
    return {share <= 0.25 && worst <= 15,
            std::to_string(report.active_scenarios.size()) + " of " + std::to_string(report.scenario_ids.size()) +
                " scenarios curtail (" + fmt(100.0 * share) + "%), at most " + std::to_string(worst) +
                " segments per scenario"};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), root).generic_string()] = io::read_text(entry.path());
    return files;
}

int full_pipeline(const fs::path& out, unsigned jobs) {
    pipeline::RunManifest m;
    m.seed = 42;
    m.count = 187;
    m.output_dir = out;
    m.jobs = jobs;
    std::ostringstream sink;
    return pipeline::cmd_risk(m, sink, sink);
}

struct PipelineRuns {
    double serial_seconds = 0.0;
    int codes = 0;
    std::map<std::string, std::string> serial, parallel, repeat;
};

const PipelineRuns& pipeline_runs(const fs::path& scratch) {
    static const PipelineRuns runs = [&] {
        PipelineRuns r;
        const auto start = Clock::now();
        r.codes |= full_pipeline(scratch / "serial", 1);
        r.serial_seconds = seconds_since(start);
        r.codes |= full_pipeline(scratch / "parallel", 4);
        r.codes |= full_pipeline(scratch / "repeat", 1);
        r.serial = read_tree(scratch / "serial");
        r.parallel = read_tree(scratch / "parallel");
        r.repeat = read_tree(scratch / "repeat");
        return r;
    }();
    return runs;
}

Outcome performance(const fs::path& scratch) {
    const auto& r = pipeline_runs(scratch);
    const bool identical = r.serial == r.parallel;
    return {r.codes == 0 && r.serial_seconds < 300.0 && identical && r.serial.size() >= 188,
            "generate+solve+risk in " + fmt(r.serial_seconds) + " s on 1 worker, " + std::to_string(r.serial.size()) +
                " files, 4-worker output " + (identical ? "identical" : "DIFFERENT")};
}

Outcome determinism(const fs::path& scratch) {
    const auto& r = pipeline_runs(scratch);
    const bool identical = r.serial == r.repeat;
    return {r.codes == 0 && identical && !r.serial.empty(),
            "two seed-42 runs " + std::string(identical ? "byte-identical" : "DIFFER") + " across " +
                std::to_string(r.serial.size()) + " files"};
}

}  // namespace

int main() {
    std::random_device rd;
    const fs::path scratch = fs::temp_directory_path() / ("microgrid-acceptance-" + std::to_string(rd()));
    fs::create_directories(scratch);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"oracle optimality", oracle_optimality},
        {"constraint residuals", constraint_residuals},
        {"degradation algebra", degradation_algebra},
        {"cVaR correctness", cvar_correctness},
        {"shortfall consistency", shortfall_consistency},
        {"midday cVaR near zero", midday_cvar},
        {"curtailment concentration", curtailment_shape},
        {"performance and parallel identity", [&] { return performance(scratch); }},
        {"determinism", [&] { return determinism(scratch); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
                  << o.detail << std::endl;
    }
    std::error_code ec;
    fs::remove_all(scratch, ec);
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
    return failed ? 1 : 0;
}
