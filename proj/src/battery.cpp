#include "microgrid/battery.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace microgrid::battery {

BatteryState initial_state(const BessParams& params) {
    BatteryState s;
    s.soc = params.initial_soc();
    s.cycles = params.initial_cycles;
    s.lambda = capacity_loss_factor(s.cycles, params.rated_max_cycles, params.gamma);
    return s;
}

double cycle_increment(double dod, double doc) {
    if (!(dod >= 0.0 && dod <= 1.0) || !(doc >= 0.0 && doc <= 1.0))
        throw std::invalid_argument("cycle_increment: depth fractions must lie in [0, 1]");
    return 0.5 * (dod + doc);
}

double capacity_loss_factor(double n_bat, double n_max, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("capacity_loss_factor: gamma must be positive");
    if (!(n_max > 0.0)) throw std::invalid_argument("capacity_loss_factor: n_max must be positive");
    if (!(n_bat >= 0.0)) throw std::invalid_argument("capacity_loss_factor: negative cycle count");
    if (n_bat > n_max)
        throw std::invalid_argument("capacity_loss_factor: cycle count " + std::to_string(n_bat) +
                                    " exceeds rated maximum " + std::to_string(n_max));
    return n_max / (gamma * (n_max - n_bat) + n_max);
}

double capacity_loss_slope(double n_bat, double n_max, double gamma) {
    const double den = gamma * (n_max - n_bat) + n_max;
    return n_max * gamma / (den * den);
}

double degradation_cost(double lambda_now, double lambda_prev, double capital_cost) {
    if (lambda_now < lambda_prev)
        throw std::invalid_argument("degradation_cost: capacity-loss factor cannot decrease");
    return (lambda_now - lambda_prev) * capital_cost;
}

int green_zone_flag(double soc, const BessParams& params, double tol) {
    return (soc >= params.soc_green_min - tol && soc <= params.soc_green_max + tol) ? 0 : 1;
}

SegmentDepth segment_depth(double charge_power, double discharge_power, double dt, double fleet_capacity) {
    return {charge_power * dt / fleet_capacity, discharge_power * dt / fleet_capacity};
}

std::optional<BatteryState> soc_update(const BatteryState& state, double charge_power, double discharge_power,
                                       double dt, const BessParams& params, double tol) {
    if (charge_power < 0.0 || discharge_power < 0.0)
        throw std::invalid_argument("soc_update: powers must be nonnegative");
    if (charge_power > 0.0 && discharge_power > 0.0)
        throw std::invalid_argument("soc_update: cannot charge and discharge in the same segment");

    const double cap = params.fleet_capacity();
    BatteryState next;
    next.soc = state.soc + (params.eta_charge * charge_power - discharge_power / params.eta_discharge) * dt / cap;
    if (next.soc < params.soc_abs_min - tol || next.soc > params.soc_abs_max + tol) return std::nullopt;

    const auto depth = segment_depth(charge_power, discharge_power, dt, cap);
    next.cycles = state.cycles + cycle_increment(std::min(depth.dod, 1.0), std::min(depth.doc, 1.0));
    if (next.cycles > params.rated_max_cycles) return std::nullopt;
    next.lambda = capacity_loss_factor(next.cycles, params.rated_max_cycles, params.gamma);
    return next;
}

}  // namespace microgrid::battery
