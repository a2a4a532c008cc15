// Exhaustive reference solver for tiny instances.

#include <cmath>
#include <limits>
#include <string>

#include "microgrid/battery.hpp"
#include "microgrid/scheduler.hpp"

namespace microgrid {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SegmentChoice {
    double cost = kInf;
    double diesel = 0.0;
    double curtail = 0.0;
    double spill = 0.0;
};

// Cheapest diesel level for a fixed battery power; curtailment or spill takes
// up the remaining imbalance.
SegmentChoice best_for_battery(const DispatchProblem& p, std::size_t t, double bess, double res, long diesel_steps) {
    const auto& cfg = p.config;
    const double dt = cfg.time.segment_hours;
    SegmentChoice best;
    for (long i = 0; i <= diesel_steps; ++i) {
        const double d = static_cast<double>(i) * res;
        if (d > 0.0 && d < cfg.diesel.p_min - 1e-12) continue;
        const double residual = p.net_load[t] - d - bess;
        SegmentChoice c;
        c.diesel = d;
        if (residual >= 0.0) {
            if (residual > p.essential_demand[t] + 1e-12) continue;
            c.curtail = residual;
        } else {
            if (-residual > p.scenario.pv_generation[t] + 1e-12) continue;
            c.spill = -residual;
        }
        c.cost = cfg.diesel.fuel_cost * d * dt + cfg.demand.curtail_cost * c.curtail * dt;
        const bool better = c.cost < best.cost ||
                            (c.cost == best.cost && (c.curtail < best.curtail ||
                                                     (c.curtail == best.curtail && c.diesel < best.diesel)));
        if (better) best = c;
    }
    return best;
}

}  // namespace

Schedule brute_force_oracle(const DispatchProblem& p, double res) {
    const auto& cfg = p.config;
    const auto& b = cfg.bess;
    const std::size_t n = p.segments();
    if (!(res > 0.0)) throw std::invalid_argument("brute_force_oracle: resolution must be positive");
    if (n > 6) throw OracleTooLarge("brute_force_oracle: " + std::to_string(n) + " segments (at most 6 supported)");

    const long nc = static_cast<long>(std::floor(b.fleet_max_charge() / res + 1e-9));
    const long nd = static_cast<long>(std::floor(b.fleet_max_discharge() / res + 1e-9));
    const long ng = static_cast<long>(std::floor(cfg.diesel.p_max / res + 1e-9));
    const long choices = nc + nd + 1;
    const long dim_c = static_cast<long>(n) * nc + 1;
    const long dim_d = static_cast<long>(n) * nd + 1;
    const double work = static_cast<double>(n) * static_cast<double>(dim_c) * static_cast<double>(dim_d) *
                            static_cast<double>(choices) +
                        static_cast<double>(n) * static_cast<double>(choices) * static_cast<double>(ng + 1);
    if (work > 1e8)
        throw OracleTooLarge("brute_force_oracle: " + std::to_string(static_cast<long long>(work)) +
                             " enumeration steps exceed the 1e8 guard");

    const double dt = cfg.time.segment_hours;
    const double cap = b.fleet_capacity();
    const double e0 = b.initial_soc() * cap;
    const double cycles_per_step = 0.5 * dt * res / cap;
    const double cycle_room = b.rated_max_cycles - b.initial_cycles;

    // seg[t][k]: battery power (k - nc) * res in segment t
    std::vector<std::vector<SegmentChoice>> seg(n, std::vector<SegmentChoice>(static_cast<std::size_t>(choices)));
    for (std::size_t t = 0; t < n; ++t)
        for (long k = 0; k < choices; ++k)
            seg[t][static_cast<std::size_t>(k)] =
                best_for_battery(p, t, static_cast<double>(k - nc) * res, res, ng);

    const auto states = static_cast<std::size_t>(dim_c * dim_d);
    auto index = [dim_d](long ic, long id) { return static_cast<std::size_t>(ic * dim_d + id); };
    std::vector<double> value(states, kInf), next(states, kInf);
    struct Parent {
        std::size_t state;
        long k;
    };
    std::vector<std::vector<Parent>> parent(n, std::vector<Parent>(states, {0, -1}));
    value[index(0, 0)] = 0.0;

    for (std::size_t t = 0; t < n; ++t) {
        std::fill(next.begin(), next.end(), kInf);
        const long max_c = static_cast<long>(t) * nc, max_d = static_cast<long>(t) * nd;
        for (long ic = 0; ic <= max_c; ++ic) {
            for (long id = 0; id <= max_d; ++id) {
                const double v = value[index(ic, id)];
                if (v == kInf) continue;
                for (long k = 0; k < choices; ++k) {
                    const auto& sc = seg[t][static_cast<std::size_t>(k)];
                    if (sc.cost == kInf) continue;
                    const long step = k - nc;
                    const long ic2 = ic + (step < 0 ? -step : 0);
                    const long id2 = id + (step > 0 ? step : 0);
                    if (static_cast<double>(ic2 + id2) * cycles_per_step > cycle_room + 1e-12) continue;
                    const double energy = e0 + dt * res *
                                                   (b.eta_charge * static_cast<double>(ic2) -
                                                    static_cast<double>(id2) / b.eta_discharge);
                    const double soc = energy / cap;
                    if (soc < b.soc_abs_min - 1e-9 || soc > b.soc_abs_max + 1e-9) continue;
                    const double cand = v + sc.cost + b.red_zone_penalty * battery::green_zone_flag(soc, b, 1e-9);
                    const auto to = index(ic2, id2);
                    if (cand < next[to]) {
                        next[to] = cand;
                        parent[t][to] = {index(ic, id), k};
                    }
                }
            }
        }
        value.swap(next);
    }

    double best = kInf;
    std::size_t best_state = states;
    for (long ic = 0; ic < dim_c; ++ic) {
        for (long id = 0; id < dim_d; ++id) {
            const double v = value[index(ic, id)];
            if (v == kInf) continue;
            const double total = v + exact_degradation(b, static_cast<double>(ic + id) * cycles_per_step);
            if (total < best - 1e-12) {
                best = total;
                best_state = index(ic, id);
            }
        }
    }
    if (best_state == states) throw PriorityShortfall(p.scenario.id, {});

    Dispatch dispatch;
    dispatch.diesel.resize(n);
    dispatch.charge.resize(n);
    dispatch.discharge.resize(n);
    dispatch.curtailment.resize(n);
    dispatch.spill.resize(n);
    std::size_t state = best_state;
    for (std::size_t t = n; t-- > 0;) {
        const auto& par = parent[t][state];
        const auto& sc = seg[t][static_cast<std::size_t>(par.k)];
        const double bess = static_cast<double>(par.k - nc) * res;
        dispatch.diesel[t] = sc.diesel;
        dispatch.charge[t] = bess < 0.0 ? -bess : 0.0;
        dispatch.discharge[t] = bess > 0.0 ? bess : 0.0;
        dispatch.curtailment[t] = sc.curtail;
        dispatch.spill[t] = sc.spill;
        state = par.state;
    }
    return assemble_schedule(p, dispatch);
}

}  // namespace microgrid
