// Shared domain types for islanded microgrid day-ahead scheduling.
//
// Units: power in kW, energy in kWh, time in hours, money in dollars.
// State of charge is always a fraction of the whole fleet capacity.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace microgrid {

struct TimeGrid {
    std::size_t segment_count = 96;
    double segment_hours = 0.25;

    double horizon_hours() const { return static_cast<double>(segment_count) * segment_hours; }
};

struct BessParams {
    int unit_count = 20;
    double capacity_per_unit = 15.0;        // kWh
    double initial_energy_per_unit = 10.0;  // kWh
    double max_charge_per_unit = 5.0;       // kW
    double max_discharge_per_unit = 5.0;    // kW
    double capital_cost = 10000.0;          // $ for the whole fleet
    double red_zone_penalty = 2.0;          // $ per segment spent outside the green zone
    double soc_green_min = 0.2;
    double soc_green_max = 0.8;
    double soc_abs_min = 0.0;
    double soc_abs_max = 1.0;
    double rated_max_cycles = 3000.0;
    double gamma = 4.0;  // $/cycle normalizer of the capacity-loss curve
    double initial_cycles = 0.0;
    double eta_charge = 1.0;
    double eta_discharge = 1.0;

    double fleet_capacity() const { return capacity_per_unit * unit_count; }
    double fleet_max_charge() const { return max_charge_per_unit * unit_count; }
    double fleet_max_discharge() const { return max_discharge_per_unit * unit_count; }
    double initial_soc() const { return initial_energy_per_unit / capacity_per_unit; }
};

struct DieselParams {
    double p_min = 0.0;       // kW
    double p_max = 3.75;      // kW
    double fuel_cost = 0.40;  // $/kWh
};

struct DemandParams {
    double epsilon = 0.5;        // priority load = epsilon * essential load
    double curtail_cost = 10.0;  // $/kWh of curtailed essential load
};

struct MicrogridConfig {
    TimeGrid time;
    BessParams bess;
    DieselParams diesel;
    DemandParams demand;
};

struct Scenario {
    std::string id;
    std::vector<double> demand_total;   // kW per segment
    std::vector<double> pv_generation;  // kW per segment
};

/// One segment of a dispatch plan. `bess_power` is positive when discharging.
///
/// `pv_spill` is available PV that is not dispatched; the power balance uses
/// dispatched PV (available minus spill).
struct SegmentDecision {
    double diesel_power = 0.0;
    double bess_power = 0.0;
    double charge_power = 0.0;
    double discharge_power = 0.0;
    double curtailment = 0.0;
    double pv_spill = 0.0;
    int u_charge = 0;
    int u_discharge = 0;
    int u_diesel = 0;
    int u_red = 0;
    double soc_end = 0.0;
    double total_served = 0.0;
    double cost = 0.0;  // $ attributed to this segment
};

struct CostBreakdown {
    double battery_degradation = 0.0;
    double fuel = 0.0;
    double curtailment = 0.0;
    double red_zone = 0.0;
    double total = 0.0;
};

struct SolveStats {
    std::size_t nodes = 0;
    std::size_t lp_iterations = 0;
    double lower_bound = 0.0;
    double gap = 0.0;  // relative gap certified by branch and bound
    bool hit_limit = false;
};

struct Schedule {
    std::string scenario_id;
    std::vector<SegmentDecision> decisions;
    CostBreakdown cost;
    SolveStats stats;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Demand split (priority, essential) with priority = epsilon * essential.
std::pair<double, double> split_demand(double d_total, double epsilon);

/// Checks the per-segment structural invariants (sign split of the battery
/// power, charge/discharge exclusivity, power limits against the fleet).
/// Returns human-readable problems; empty when the decision is well formed.
std::vector<std::string> check_decision(const SegmentDecision& d, const BessParams& bess, double tol = 1e-6);

}  // namespace microgrid
