// Sample value-at-risk and conditional value-at-risk of curtailment shortfall
// across scenarios, plus the descriptive curtailment statistics reported with
// them.
//
// `tail_fraction` is the probability mass of the worst outcomes (0.05 for the
// worst 5%); in confidence-level notation it is 1 - beta.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "microgrid/scheduler.hpp"

namespace microgrid::risk {

/// Curtailment below this (kW) counts as none.
inline constexpr double kCurtailThreshold = 1e-6;

struct LossMatrix {
    std::vector<std::vector<double>> values;  // [scenario][segment] shortfall, kW, >= 0
    std::vector<std::string> scenario_ids;
    double tail_fraction = 0.05;
    std::vector<std::vector<double>> denominator_demand;  // [scenario][segment] served demand, kW

    std::size_t scenario_count() const { return values.size(); }
    std::size_t segment_count() const { return values.empty() ? 0 : values.front().size(); }
};

struct RiskReport {
    std::vector<double> var_per_segment;
    std::vector<double> cvar_per_segment;
    std::vector<double> cvar_ratio_per_segment;  // cVaR of curtailment / served demand
    std::vector<std::string> scenario_ids;
    std::vector<std::size_t> curtail_instances_per_scenario;
    std::vector<double> std_per_segment;
    std::vector<std::string> active_scenarios;  // in scenario order
    double tail_fraction = 0.05;
    std::size_t tail_scenarios = 0;  // floor(N * tail_fraction), diagnostic only
};

struct CvarResult {
    double cvar = 0.0;
    double alpha_star = 0.0;
};

/// Unmet load after diesel and battery, clipped at zero.
double shortfall(double net_load, double bess_power, double diesel_power);

double empirical_var(std::span<const double> losses, double tail_fraction);

/// min over alpha of alpha + sum([loss - alpha]+) / (N * tail_fraction),
/// minimized exactly over the sample values (the objective's breakpoints).
CvarResult empirical_cvar(std::span<const double> losses, double tail_fraction);

/// Throws std::invalid_argument on misaligned inputs or when a shortfall
/// disagrees with the scheduled curtailment by more than 1e-6 kW.
LossMatrix build_loss_matrix(const std::vector<Schedule>& schedules, const std::vector<DispatchProblem>& problems,
                             double tail_fraction = 0.05);

RiskReport risk_report(const LossMatrix& matrix);

}  // namespace microgrid::risk
