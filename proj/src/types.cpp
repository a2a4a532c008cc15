#include "microgrid/types.hpp"

#include <cmath>
#include <sstream>

namespace microgrid {

std::pair<double, double> split_demand(double d_total, double epsilon) {
    if (!(d_total >= 0.0)) throw std::invalid_argument("split_demand: negative demand");
    if (!(epsilon > 0.0)) throw std::invalid_argument("split_demand: epsilon must be positive");
    const double essential = d_total / (1.0 + epsilon);
    // priority is the remainder so the two parts add back to d_total
    const double priority = d_total - essential;
    return {priority, essential};
}

std::vector<std::string> check_decision(const SegmentDecision& d, const BessParams& bess, double tol) {
    std::vector<std::string> out;
    auto add = [&out](const std::string& what, double magnitude) {
        std::ostringstream os;
        os << what << " (magnitude " << magnitude << ")";
        out.push_back(os.str());
    };
    const double split = d.bess_power - (d.discharge_power - d.charge_power);
    if (std::abs(split) > tol) add("bess_power != discharge - charge", std::abs(split));
    if (d.u_charge + d.u_discharge > 1) add("charging and discharging at once", 1.0);
    if (d.charge_power < -tol) add("negative charge power", -d.charge_power);
    if (d.discharge_power < -tol) add("negative discharge power", -d.discharge_power);
    const double c_lim = d.u_charge * bess.fleet_max_charge();
    if (d.charge_power > c_lim + tol) add("charge power above u_charge * fleet max", d.charge_power - c_lim);
    const double d_lim = d.u_discharge * bess.fleet_max_discharge();
    if (d.discharge_power > d_lim + tol) add("discharge power above u_discharge * fleet max", d.discharge_power - d_lim);
    return out;
}

}  // namespace microgrid
