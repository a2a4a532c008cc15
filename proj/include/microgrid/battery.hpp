// Battery fleet state evolution and cycle-based degradation.
//
// The fleet is one lumped battery. Each segment adds a half cycle
// 0.5 * (DoD + DoC), where DoD/DoC are the discharged/charged energy of the
// segment as fractions of fleet capacity. The capacity-loss factor follows
//
//     n_max - n = n_max * (1 - lambda) / (lambda * gamma)
//
// solved for lambda, so lambda(0) = 1 / (1 + gamma) and lambda(n_max) = 1.
// Only differences of lambda are ever charged against the capital cost.

#pragma once

#include <optional>

#include "microgrid/types.hpp"

namespace microgrid::battery {

struct BatteryState {
    double soc = 0.0;
    double cycles = 0.0;
    double lambda = 0.0;
};

/// Start-of-day state from the configured initial energy and cycle count.
BatteryState initial_state(const BessParams& params);

double cycle_increment(double dod, double doc);

double capacity_loss_factor(double n_bat, double n_max, double gamma);

/// d(lambda)/d(n) at n_bat.
double capacity_loss_slope(double n_bat, double n_max, double gamma);

double degradation_cost(double lambda_now, double lambda_prev, double capital_cost);

/// 0 inside [soc_green_min, soc_green_max] (inclusive), else 1. `tol` widens
/// the band to absorb solver round-off.
int green_zone_flag(double soc, const BessParams& params, double tol = 0.0);

/// Advances the state by one segment. Returns nullopt when the new SOC would
/// leave [soc_abs_min, soc_abs_max] (beyond `tol`); callers treat that as an
/// infeasible move.
std::optional<BatteryState> soc_update(const BatteryState& state, double charge_power, double discharge_power,
                                       double dt, const BessParams& params, double tol = 1e-9);

/// Depth of charge/discharge of one segment as fleet-capacity fractions.
struct SegmentDepth {
    double doc = 0.0;
    double dod = 0.0;
};
SegmentDepth segment_depth(double charge_power, double discharge_power, double dt, double fleet_capacity);

}  // namespace microgrid::battery
