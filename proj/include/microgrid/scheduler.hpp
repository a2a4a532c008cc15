// Day-ahead dispatch of an islanded microgrid for a single scenario.
//
// Per segment the plan chooses diesel output, battery charge/discharge,
// essential-load curtailment and PV spill so that
//
//     demand - curtailment = diesel + (discharge - charge) + (pv - spill)
//
// while minimizing fuel + curtailment + red-zone penalties + battery
// degradation, where degradation is the capital cost times the growth of the
// capacity-loss factor over the day. Priority load is never curtailed.
//
// The solver is branch and bound over the red-zone (and, when the diesel has
// a positive minimum output, on/off) binaries with a simplex relaxation at
// every node. The degradation term is convex in the day's total throughput and
// enters the relaxation through tangent cuts, starting from the marginal cost
// at the start-of-day cycle count.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "microgrid/types.hpp"

namespace microgrid {

struct DispatchProblem {
    MicrogridConfig config;
    Scenario scenario;
    std::vector<double> net_load;  // demand - pv, may be negative
    std::vector<double> priority_demand;
    std::vector<double> essential_demand;

    std::size_t segments() const { return net_load.size(); }
};

struct SolveOptions {
    double optimality_gap = 1e-4;  // relative
    double time_limit = 60.0;      // seconds, wall clock
    double power_resolution_for_oracle = 0.25;
    // Deterministic cap on branch-and-bound nodes; the time limit is only a
    // safety net since hitting it makes results timing dependent.
    std::size_t node_limit = 20000;
};

/// Raw per-segment dispatch; everything else in a Schedule is derived from it.
struct Dispatch {
    std::vector<double> diesel;
    std::vector<double> charge;
    std::vector<double> discharge;
    std::vector<double> curtailment;
    std::vector<double> spill;
};

struct Violation {
    std::string constraint;
    std::size_t segment = 0;  // 0-based
    double magnitude = 0.0;
    std::string detail;
};

/// Priority load exceeds what the microgrid can supply in some segments.
class PriorityShortfall : public std::runtime_error {
public:
    PriorityShortfall(std::string scenario_id, std::vector<std::size_t> segments);
    const std::string& scenario_id() const { return scenario_id_; }
    const std::vector<std::size_t>& segments() const { return segments_; }

private:
    std::string scenario_id_;
    std::vector<std::size_t> segments_;
};

class OracleTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

DispatchProblem build_problem(const MicrogridConfig& config, const Scenario& scenario);

Schedule solve_day_ahead(const DispatchProblem& problem, const SolveOptions& options = {});

/// Exhaustive search over diesel and battery power on a `resolution` grid
/// (curtailment or spill absorbs the balance residual), by dynamic programming
/// over (cumulative charge steps, cumulative discharge steps). Limited to at
/// most 6 segments and 1e8 state transitions.
Schedule brute_force_oracle(const DispatchProblem& problem, double resolution);

std::vector<Violation> validate_schedule(const Schedule& schedule, const DispatchProblem& problem,
                                         double tol = 1e-6);

/// Derives SOC, binaries, served load and per-segment costs from a raw dispatch.
Schedule assemble_schedule(const DispatchProblem& problem, const Dispatch& dispatch);

/// Per-segment costs recomputed from the decisions' dispatch fields.
std::vector<double> segment_costs(const std::vector<SegmentDecision>& decisions, const DispatchProblem& problem,
                                  CostBreakdown* breakdown = nullptr);

/// Day degradation cost for a total cycle increment `day_cycles`, exactly and
/// with the start-of-day marginal rate.
double exact_degradation(const BessParams& bess, double day_cycles);
double linearized_degradation(const BessParams& bess, double day_cycles);

/// Cycles added by one segment.
double segment_cycles(const BessParams& bess, double dt, double charge_power, double discharge_power);

}  // namespace microgrid
