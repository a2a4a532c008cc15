#include "microgrid/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "microgrid/battery.hpp"
#include "microgrid/lp.hpp"

namespace microgrid {
namespace {

constexpr double kValueEps = 1e-8;
constexpr double kFlagTol = 1e-9;

std::string segment_list(const std::vector<std::size_t>& segs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < segs.size(); ++i) os << (i ? "," : "") << segs[i] + 1;
    return os.str();
}

double clamp_clean(double v, double lo, double hi) {
    v = std::clamp(v, lo, hi);
    if (std::abs(v) < kValueEps) v = 0.0;
    if (std::abs(v - hi) < kValueEps) v = hi;
    return v;
}

// Column indices of one dispatch model; -1 marks an absent column.
struct Model {
    lp::Simplex lp;
    std::vector<int> diesel, charge, discharge, curtail, spill, energy, red, diesel_on, unserved;
    int degradation = -1;
    std::vector<int> binaries;
    std::vector<double> costs;  // indexed by LP column; slack columns stay 0
    double cycles_per_kw = 0.0;  // cycles added per kW of charge or discharge in one segment
    std::size_t cuts = 0;
};

enum class ModelKind { dispatch, diagnostic };

Model build_model(const DispatchProblem& p, ModelKind kind) {
    const auto& cfg = p.config;
    const auto& b = cfg.bess;
    const std::size_t n = p.segments();
    const double dt = cfg.time.segment_hours;
    const double cap = b.fleet_capacity();
    const bool diag = kind == ModelKind::diagnostic;

    Model m;
    m.cycles_per_kw = 0.5 * dt / cap;
    m.diesel.assign(n, -1);
    m.charge = m.discharge = m.curtail = m.spill = m.energy = m.red = m.diesel_on = m.unserved = m.diesel;

    auto var = [&m](double lb, double ub, double cost) {
        const int v = m.lp.add_variable(lb, ub, cost);
        m.costs.resize(static_cast<std::size_t>(v) + 1, 0.0);
        m.costs[static_cast<std::size_t>(v)] = cost;
        return v;
    };

    // Reachable energy envelope, used to skip red-zone machinery that can never bind.
    double lo_e = b.initial_soc() * cap, hi_e = lo_e;
    const bool red_possible = !diag && b.red_zone_penalty > 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        m.diesel[t] = var(0.0, cfg.diesel.p_max, diag ? 0.0 : cfg.diesel.fuel_cost * dt);
        m.charge[t] = var(0.0, b.fleet_max_charge(), 0.0);
        m.discharge[t] = var(0.0, b.fleet_max_discharge(), 0.0);
        m.curtail[t] = var(0.0, p.essential_demand[t], diag ? 0.0 : cfg.demand.curtail_cost * dt);
        m.spill[t] = var(0.0, p.scenario.pv_generation[t], 0.0);
        m.energy[t] = var(b.soc_abs_min * cap, b.soc_abs_max * cap, 0.0);
        lo_e = std::max(b.soc_abs_min * cap, lo_e - dt * b.fleet_max_discharge() / b.eta_discharge);
        hi_e = std::min(b.soc_abs_max * cap, hi_e + dt * b.fleet_max_charge() * b.eta_charge);
        const bool low_reachable = lo_e < b.soc_green_min * cap - 1e-9;
        const bool high_reachable = hi_e > b.soc_green_max * cap + 1e-9;
        if (red_possible && (low_reachable || high_reachable)) {
            m.red[t] = var(0.0, 1.0, b.red_zone_penalty);
            m.binaries.push_back(m.red[t]);
            if (high_reachable) {
                const lp::Term row[] = {{m.energy[t], 1.0}, {m.red[t], -(b.soc_abs_max - b.soc_green_max) * cap}};
                m.lp.add_row(row, -lp::kInf, b.soc_green_max * cap);
            }
            if (low_reachable) {
                const lp::Term row[] = {{m.energy[t], 1.0}, {m.red[t], (b.soc_green_min - b.soc_abs_min) * cap}};
                m.lp.add_row(row, b.soc_green_min * cap, lp::kInf);
            }
        }
        if (cfg.diesel.p_min > 0.0 && !diag) {
            m.diesel_on[t] = var(0.0, 1.0, 0.0);
            m.binaries.push_back(m.diesel_on[t]);
            const lp::Term upper[] = {{m.diesel[t], 1.0}, {m.diesel_on[t], -cfg.diesel.p_max}};
            m.lp.add_row(upper, -lp::kInf, 0.0);
            const lp::Term lower[] = {{m.diesel[t], 1.0}, {m.diesel_on[t], -cfg.diesel.p_min}};
            m.lp.add_row(lower, 0.0, lp::kInf);
        }
        // Unserved priority load is cheaper late in the day, so a shortage
        // is reported where the stored energy runs out.
        if (diag) m.unserved[t] = var(0.0, p.priority_demand[t], 2.0 - static_cast<double>(t) / static_cast<double>(n));

        // demand - curtailment = diesel + discharge - charge + pv - spill (- unserved)
        std::vector<lp::Term> balance = {{m.diesel[t], 1.0},   {m.discharge[t], 1.0}, {m.charge[t], -1.0},
                                         {m.curtail[t], 1.0},  {m.spill[t], -1.0}};
        if (diag) balance.push_back({m.unserved[t], 1.0});
        const double rhs = p.scenario.demand_total[t] - p.scenario.pv_generation[t];
        m.lp.add_row(balance, rhs, rhs);

        std::vector<lp::Term> dyn = {{m.energy[t], 1.0},
                                     {m.charge[t], -dt * b.eta_charge},
                                     {m.discharge[t], dt / b.eta_discharge}};
        double dyn_rhs = 0.0;
        if (t == 0)
            dyn_rhs = b.initial_soc() * cap;
        else
            dyn.push_back({m.energy[t - 1], -1.0});
        m.lp.add_row(dyn, dyn_rhs, dyn_rhs);
    }

    if (!diag && b.capital_cost > 0.0) {
        m.degradation = var(0.0, lp::kInf, 1.0);
    }
    const double cycle_room = b.rated_max_cycles - b.initial_cycles;
    const double max_day_cycles =
        static_cast<double>(n) * m.cycles_per_kw * (b.fleet_max_charge() + b.fleet_max_discharge());
    if (max_day_cycles > cycle_room) {
        std::vector<lp::Term> row;
        for (std::size_t t = 0; t < n; ++t) {
            row.push_back({m.charge[t], m.cycles_per_kw});
            row.push_back({m.discharge[t], m.cycles_per_kw});
        }
        m.lp.add_row(row, -lp::kInf, cycle_room);
    }
    return m;
}

double day_cycles(const Model& m, const std::vector<double>& x) {
    double total = 0.0;
    for (std::size_t t = 0; t < m.charge.size(); ++t)
        total += x[static_cast<std::size_t>(m.charge[t])] + x[static_cast<std::size_t>(m.discharge[t])];
    return std::max(0.0, total * m.cycles_per_kw);
}

void add_degradation_cut(Model& m, const BessParams& b, double at_cycles) {
    const double slope = b.capital_cost * battery::capacity_loss_slope(b.initial_cycles + at_cycles,
                                                                        b.rated_max_cycles, b.gamma);
    const double value = exact_degradation(b, at_cycles);
    std::vector<lp::Term> row = {{m.degradation, 1.0}};
    for (std::size_t t = 0; t < m.charge.size(); ++t) {
        row.push_back({m.charge[t], -slope * m.cycles_per_kw});
        row.push_back({m.discharge[t], -slope * m.cycles_per_kw});
    }
    m.lp.add_row(row, value - slope * at_cycles, lp::kInf);
    ++m.cuts;
}

// Re-solves after bound or row changes, refining the degradation envelope
// until it is exact at the relaxation optimum.
lp::Status resolve(Model& m, const BessParams& b) {
    for (int round = 0; round < 50; ++round) {
        const auto st = m.lp.solve_dual();
        if (st != lp::Status::optimal || m.degradation < 0) return st;
        const double n = day_cycles(m, m.lp.values());
        const double exact = exact_degradation(b, n);
        if (exact - m.lp.value(m.degradation) <= 1e-10 * (1.0 + std::abs(exact))) return st;
        add_degradation_cut(m, b, n);
    }
    return lp::Status::optimal;
}

// Objective of an LP point with red-zone binaries taken from the actual SOC
// and the exact degradation cost.
double true_cost(const Model& m, const DispatchProblem& p, const std::vector<double>& x) {
    const auto& cfg = p.config;
    const double dt = cfg.time.segment_hours;
    const double cap = cfg.bess.fleet_capacity();
    double z = 0.0;
    for (std::size_t t = 0; t < p.segments(); ++t) {
        z += cfg.diesel.fuel_cost * dt * x[static_cast<std::size_t>(m.diesel[t])];
        z += cfg.demand.curtail_cost * dt * x[static_cast<std::size_t>(m.curtail[t])];
        z += cfg.bess.red_zone_penalty *
             battery::green_zone_flag(x[static_cast<std::size_t>(m.energy[t])] / cap, cfg.bess, kFlagTol);
    }
    if (m.degradation >= 0) z += exact_degradation(cfg.bess, day_cycles(m, x));
    return z;
}

// Integer assignment implied by an LP point, if one exists without moving it.
std::optional<std::vector<int>> round_binaries(const Model& m, const DispatchProblem& p, const std::vector<double>& x) {
    const auto& cfg = p.config;
    const double cap = cfg.bess.fleet_capacity();
    std::vector<int> out;
    out.reserve(m.binaries.size());
    for (std::size_t t = 0; t < p.segments(); ++t) {
        if (m.red[t] >= 0)
            out.push_back(battery::green_zone_flag(x[static_cast<std::size_t>(m.energy[t])] / cap, cfg.bess, kFlagTol));
        if (m.diesel_on[t] >= 0) {
            const double d = x[static_cast<std::size_t>(m.diesel[t])];
            if (d > 1e-9 && d < cfg.diesel.p_min - 1e-9) return std::nullopt;
            out.push_back(d > 1e-9 ? 1 : 0);
        }
    }
    return out;
}

struct Incumbent {
    double cost = lp::kInf;
    std::vector<double> x;
    std::vector<int> binaries;
};

Dispatch extract(const Model& m, const DispatchProblem& p, const std::vector<double>& x) {
    const std::size_t n = p.segments();
    const auto& b = p.config.bess;
    Dispatch out;
    auto get = [&x](int v) { return x[static_cast<std::size_t>(v)]; };
    for (std::size_t t = 0; t < n; ++t) {
        double d = clamp_clean(get(m.diesel[t]), 0.0, p.config.diesel.p_max);
        double c = clamp_clean(get(m.charge[t]), 0.0, b.fleet_max_charge());
        double q = clamp_clean(get(m.discharge[t]), 0.0, b.fleet_max_discharge());
        double e = clamp_clean(get(m.curtail[t]), 0.0, p.essential_demand[t]);
        double s = clamp_clean(get(m.spill[t]), 0.0, p.scenario.pv_generation[t]);
        if (c > 0.0 && q > 0.0 && b.eta_charge == 1.0 && b.eta_discharge == 1.0) {
            const double net = q - c;
            c = std::max(-net, 0.0);
            q = std::max(net, 0.0);
        }
        // Curtailing while spilling is never cheaper than doing neither.
        if (e > 0.0 && s > 0.0) {
            const double both = std::min(e, s);
            e -= both;
            s -= both;
        }
        // Close the round-off residual on interior diesel, curtailment or spill.
        const double residual = p.net_load[t] - (d + q - c + e - s);
        const double d_lo = d > 0.0 ? p.config.diesel.p_min : 0.0;
        const bool diesel_absorbs =
            std::abs(residual) <= 1e-6 && e == 0.0 && d > 0.0 && d + residual >= d_lo && d + residual <= p.config.diesel.p_max;
        if (diesel_absorbs) {
            d += residual;
        } else if (std::abs(residual) > 1e-9) {
            if (e > 0.0 || (residual > 0.0 && s == 0.0))
                e = std::clamp(e + residual, 0.0, p.essential_demand[t]);
            else
                s = std::clamp(s - residual, 0.0, p.scenario.pv_generation[t]);
        }
        out.diesel.push_back(d);
        out.charge.push_back(c);
        out.discharge.push_back(q);
        out.curtailment.push_back(e);
        out.spill.push_back(s);
    }
    return out;
}

std::vector<std::size_t> power_shortfall_segments(const DispatchProblem& p) {
    const auto& cfg = p.config;
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < p.segments(); ++t) {
        const double supply = p.scenario.pv_generation[t] + cfg.diesel.p_max + cfg.bess.fleet_max_discharge();
        if (p.priority_demand[t] > supply + 1e-9) out.push_back(t);
    }
    return out;
}

std::vector<std::size_t> energy_shortfall_segments(const DispatchProblem& p) {
    Model diag = build_model(p, ModelKind::diagnostic);
    if (diag.lp.solve_dual() != lp::Status::optimal) return {};
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < p.segments(); ++t)
        if (diag.lp.value(diag.unserved[t]) > 1e-7) out.push_back(t);
    return out;
}

// Lexicographic tie-break among optimal plans with the binaries fixed:
// least curtailment, then curtailment as late as possible, then least
// battery throughput, then least diesel.
void tie_break(Model& m, const DispatchProblem& p) {
    const auto& b = p.config.bess;
    const std::size_t nvar = m.lp.variable_count();

    auto cap_objective = [&m](const std::vector<double>& coef, double bound) {
        std::vector<lp::Term> row;
        for (std::size_t j = 0; j < coef.size(); ++j)
            if (coef[j] != 0.0) row.push_back({static_cast<int>(j), coef[j]});
        m.lp.add_row(row, -lp::kInf, bound);
    };
    auto secondary = [&](const std::vector<int>& a, const std::vector<int>& c2) {
        std::vector<double> coef(nvar, 0.0);
        for (int v : a) coef[static_cast<std::size_t>(v)] = 1.0;
        for (int v : c2) coef[static_cast<std::size_t>(v)] = 1.0;
        return coef;
    };
    auto value_of = [&m](const std::vector<double>& coef) {
        double z = 0.0;
        for (std::size_t j = 0; j < coef.size(); ++j) z += coef[j] * m.lp.value(static_cast<int>(j));
        return z;
    };

    std::vector<double> current = m.costs;
    const double z = value_of(current);
    cap_objective(current, z + 1e-9 * (1.0 + std::abs(z)));

    std::vector<double> earliness(nvar, 0.0);
    for (std::size_t t = 0; t < m.curtail.size(); ++t)
        earliness[static_cast<std::size_t>(m.curtail[t])] = static_cast<double>(m.curtail.size() - t);
    const std::vector<std::vector<double>> stages = {
        secondary(m.curtail, {}),
        earliness,
        secondary(m.charge, m.discharge),
        secondary(m.diesel, {}),
    };
    for (std::size_t k = 0; k < stages.size(); ++k) {
        m.lp.set_objective(stages[k]);
        if (m.lp.solve_primal() != lp::Status::optimal) return;
        if (resolve(m, b) != lp::Status::optimal) return;
        if (k + 1 == stages.size()) break;
        const double v = value_of(stages[k]);
        cap_objective(stages[k], v + 1e-9 * (1.0 + std::abs(v)));
    }
}

}  // namespace

PriorityShortfall::PriorityShortfall(std::string scenario_id, std::vector<std::size_t> segments)
    : std::runtime_error("scenario " + scenario_id + ": priority demand cannot be served in segment(s) " +
                         segment_list(segments)),
      scenario_id_(std::move(scenario_id)),
      segments_(std::move(segments)) {}

double segment_cycles(const BessParams& bess, double dt, double charge_power, double discharge_power) {
    const auto depth = battery::segment_depth(charge_power, discharge_power, dt, bess.fleet_capacity());
    return 0.5 * (depth.dod + depth.doc);
}

double exact_degradation(const BessParams& b, double day_cycles) {
    const double n0 = b.initial_cycles;
    const double n1 = std::min(n0 + day_cycles, b.rated_max_cycles);
    return b.capital_cost * (battery::capacity_loss_factor(n1, b.rated_max_cycles, b.gamma) -
                             battery::capacity_loss_factor(n0, b.rated_max_cycles, b.gamma));
}

double linearized_degradation(const BessParams& b, double day_cycles) {
    return b.capital_cost * battery::capacity_loss_slope(b.initial_cycles, b.rated_max_cycles, b.gamma) * day_cycles;
}

DispatchProblem build_problem(const MicrogridConfig& config, const Scenario& scenario) {
    const std::size_t n = scenario.demand_total.size();
    if (n == 0) throw ScenarioError("scenario " + scenario.id + ": empty scenario");
    if (scenario.pv_generation.size() != n || n != config.time.segment_count)
        throw ScenarioError("scenario " + scenario.id + ": expected " + std::to_string(config.time.segment_count) +
                            " segments of demand and PV, got " + std::to_string(n) + " and " +
                            std::to_string(scenario.pv_generation.size()));
    DispatchProblem p;
    p.config = config;
    p.scenario = scenario;
    for (std::size_t t = 0; t < n; ++t) {
        const double demand = scenario.demand_total[t];
        const double pv = scenario.pv_generation[t];
        if (!(demand >= 0.0) || !(pv >= 0.0) || !std::isfinite(demand) || !std::isfinite(pv))
            throw ScenarioError("scenario " + scenario.id + ": negative or non-finite value in segment " +
                                std::to_string(t + 1));
        const auto [priority, essential] = split_demand(demand, config.demand.epsilon);
        p.priority_demand.push_back(priority);
        p.essential_demand.push_back(essential);
        p.net_load.push_back(priority + essential - pv);
    }
    return p;
}

Schedule solve_day_ahead(const DispatchProblem& p, const SolveOptions& options) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const auto& b = p.config.bess;

    if (auto segs = power_shortfall_segments(p); !segs.empty()) throw PriorityShortfall(p.scenario.id, segs);

    Model m = build_model(p, ModelKind::dispatch);
    if (m.degradation >= 0) add_degradation_cut(m, b, 0.0);

    const std::size_t nbin = m.binaries.size();
    struct Node {
        std::vector<std::pair<std::size_t, int>> fixed;  // (binary index, value)
        double bound;
    };
    std::vector<Node> stack;
    stack.push_back({{}, -lp::kInf});
    std::vector<double> cur_lb(nbin, 0.0), cur_ub(nbin, 1.0);

    Incumbent best;
    SolveStats stats;
    double pruned_bound = lp::kInf;
    auto prune_tol = [&](double inc) {
        return std::max(1e-9 * (1.0 + std::abs(inc)), options.optimality_gap * std::abs(inc));
    };
    bool root = true;

    while (!stack.empty()) {
        const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
        if (stats.nodes >= options.node_limit || elapsed > options.time_limit) {
            stats.hit_limit = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        if (node.bound >= best.cost - prune_tol(best.cost)) {
            pruned_bound = std::min(pruned_bound, node.bound);
            continue;
        }

        std::vector<double> lo(nbin, 0.0), hi(nbin, 1.0);
        for (const auto& [k, v] : node.fixed) lo[k] = hi[k] = v;
        for (std::size_t k = 0; k < nbin; ++k) {
            if (lo[k] == cur_lb[k] && hi[k] == cur_ub[k]) continue;
            m.lp.set_bounds(m.binaries[k], lo[k], hi[k]);
            cur_lb[k] = lo[k];
            cur_ub[k] = hi[k];
        }
        const auto st = resolve(m, b);
        ++stats.nodes;
        if (st == lp::Status::infeasible) {
            if (root) {
                auto segs = energy_shortfall_segments(p);
                if (segs.empty()) throw std::runtime_error("scenario " + p.scenario.id + ": dispatch infeasible");
                throw PriorityShortfall(p.scenario.id, std::move(segs));
            }
            continue;
        }
        if (st != lp::Status::optimal)
            throw std::runtime_error("scenario " + p.scenario.id + ": relaxation failed (" + lp::to_string(st) + ")");
        root = false;

        const double z = m.lp.objective();
        if (z >= best.cost - prune_tol(best.cost)) {
            pruned_bound = std::min(pruned_bound, z);
            continue;
        }
        const auto x = m.lp.values();
        if (auto ints = round_binaries(m, p, x)) {
            const double cost = true_cost(m, p, x);
            if (cost < best.cost) best = {cost, x, std::move(*ints)};
        }

        std::size_t branch = nbin;
        double frac_best = 1e-7;
        for (std::size_t k = 0; k < nbin; ++k) {
            const double v = x[static_cast<std::size_t>(m.binaries[k])];
            const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
            if (frac > frac_best) {
                frac_best = frac;
                branch = k;
            }
        }
        if (branch == nbin) continue;  // integral; the rounding above captured it
        const double v = x[static_cast<std::size_t>(m.binaries[branch])];
        const int first = v >= 0.5 ? 1 : 0;
        Node later{node.fixed, z}, sooner{std::move(node.fixed), z};
        later.fixed.emplace_back(branch, 1 - first);
        sooner.fixed.emplace_back(branch, first);
        stack.push_back(std::move(later));
        stack.push_back(std::move(sooner));
    }
    if (best.x.empty()) throw std::runtime_error("scenario " + p.scenario.id + ": no feasible dispatch found");

    double lower = std::min(best.cost, pruned_bound);
    for (const auto& node : stack) lower = std::min(lower, node.bound);
    stats.lower_bound = lower;
    stats.gap = best.cost > 0.0 ? std::max(0.0, (best.cost - lower) / best.cost) : 0.0;

    // Polish: binaries fixed at the incumbent, continuous part re-optimized
    // and tie-broken.
    for (std::size_t k = 0; k < nbin; ++k) m.lp.set_bounds(m.binaries[k], best.binaries[k], best.binaries[k]);
    std::vector<double> x = best.x;
    if (resolve(m, b) == lp::Status::optimal && true_cost(m, p, m.lp.values()) <= best.cost + 1e-9) {
        tie_break(m, p);
        const auto polished = m.lp.values();
        if (true_cost(m, p, polished) <= best.cost + 1e-9 * (1.0 + std::abs(best.cost))) x = polished;
    }
    stats.lp_iterations = m.lp.iterations();

    Schedule schedule = assemble_schedule(p, extract(m, p, x));
    schedule.stats = stats;
    return schedule;
}

std::vector<double> segment_costs(const std::vector<SegmentDecision>& decisions, const DispatchProblem& p,
                                  CostBreakdown* breakdown) {
    const auto& cfg = p.config;
    const auto& b = cfg.bess;
    const double dt = cfg.time.segment_hours;
    CostBreakdown cb;
    std::vector<double> out;
    out.reserve(decisions.size());
    double cycles = b.initial_cycles;
    double lambda = battery::capacity_loss_factor(cycles, b.rated_max_cycles, b.gamma);
    for (const auto& d : decisions) {
        cycles = std::min(cycles + segment_cycles(b, dt, std::max(d.charge_power, 0.0), std::max(d.discharge_power, 0.0)),
                          b.rated_max_cycles);
        const double next = battery::capacity_loss_factor(cycles, b.rated_max_cycles, b.gamma);
        const double degr = battery::degradation_cost(next, lambda, b.capital_cost);
        lambda = next;
        const double fuel = cfg.diesel.fuel_cost * d.diesel_power * dt;
        const double curt = cfg.demand.curtail_cost * d.curtailment * dt;
        const double red = b.red_zone_penalty * d.u_red;
        cb.battery_degradation += degr;
        cb.fuel += fuel;
        cb.curtailment += curt;
        cb.red_zone += red;
        out.push_back(degr + fuel + curt + red);
    }
    cb.total = cb.battery_degradation + cb.fuel + cb.curtailment + cb.red_zone;
    if (breakdown) *breakdown = cb;
    return out;
}

Schedule assemble_schedule(const DispatchProblem& p, const Dispatch& dispatch) {
    const auto& cfg = p.config;
    const auto& b = cfg.bess;
    const double dt = cfg.time.segment_hours;
    const double cap = b.fleet_capacity();
    Schedule s;
    s.scenario_id = p.scenario.id;
    double soc = b.initial_soc();
    for (std::size_t t = 0; t < p.segments(); ++t) {
        SegmentDecision d;
        d.diesel_power = dispatch.diesel[t];
        d.charge_power = dispatch.charge[t];
        d.discharge_power = dispatch.discharge[t];
        d.bess_power = d.discharge_power - d.charge_power;
        d.curtailment = dispatch.curtailment[t];
        d.pv_spill = dispatch.spill[t];
        d.u_charge = d.charge_power > 0.0 ? 1 : 0;
        d.u_discharge = d.discharge_power > 0.0 ? 1 : 0;
        d.u_diesel = d.diesel_power > 0.0 ? 1 : 0;
        soc += (b.eta_charge * d.charge_power - d.discharge_power / b.eta_discharge) * dt / cap;
        if (soc < b.soc_abs_min && soc > b.soc_abs_min - kFlagTol) soc = b.soc_abs_min;
        if (soc > b.soc_abs_max && soc < b.soc_abs_max + kFlagTol) soc = b.soc_abs_max;
        d.soc_end = soc;
        d.u_red = battery::green_zone_flag(soc, b, kFlagTol);
        d.total_served = p.scenario.demand_total[t] - d.curtailment;
        s.decisions.push_back(d);
    }
    const auto costs = segment_costs(s.decisions, p, &s.cost);
    for (std::size_t t = 0; t < costs.size(); ++t) s.decisions[t].cost = costs[t];
    return s;
}

std::vector<Violation> validate_schedule(const Schedule& s, const DispatchProblem& p, double tol) {
    const auto& cfg = p.config;
    const auto& b = cfg.bess;
    const double dt = cfg.time.segment_hours;
    const double cap = b.fleet_capacity();
    std::vector<Violation> out;
    auto flag = [&out](const char* what, std::size_t t, double mag, std::string detail = {}) {
        out.push_back({what, t, mag, std::move(detail)});
    };
    if (s.decisions.size() != p.segments()) {
        flag("segment_count", 0, std::abs(static_cast<double>(s.decisions.size()) - static_cast<double>(p.segments())),
             "schedule has " + std::to_string(s.decisions.size()) + " segments, problem has " +
                 std::to_string(p.segments()));
        return out;
    }
    const auto costs = segment_costs(s.decisions, p);
    double soc_prev = b.initial_soc();
    double cycles = b.initial_cycles;
    for (std::size_t t = 0; t < p.segments(); ++t) {
        const auto& d = s.decisions[t];
        const double demand = p.scenario.demand_total[t];
        const double pv = p.scenario.pv_generation[t];

        for (int v : {d.u_charge, d.u_discharge, d.u_diesel, d.u_red})
            if (v != 0 && v != 1) flag("binary_domain", t, std::abs(v));

        const double balance = demand - d.curtailment - (d.diesel_power + d.bess_power + pv - d.pv_spill);
        if (std::abs(balance) > tol) flag("power_balance", t, std::abs(balance));

        const double d_lo = cfg.diesel.p_min * d.u_diesel, d_hi = cfg.diesel.p_max * d.u_diesel;
        if (d.diesel_power < d_lo - tol) flag("diesel_limits", t, d_lo - d.diesel_power);
        if (d.diesel_power > d_hi + tol) flag("diesel_limits", t, d.diesel_power - d_hi);

        const double served = demand - d.curtailment;
        if (std::abs(d.total_served - served) > tol) flag("served_total", t, std::abs(d.total_served - served));

        if (d.curtailment < -tol) flag("curtailment_limits", t, -d.curtailment);
        if (d.curtailment > p.essential_demand[t] + tol)
            flag("curtailment_limits", t, d.curtailment - p.essential_demand[t], "priority load curtailed");

        if (d.u_charge + d.u_discharge > 1) flag("charge_discharge_exclusive", t, 1.0);
        const double split = d.bess_power - (d.discharge_power - d.charge_power);
        if (std::abs(split) > tol) flag("bess_split", t, std::abs(split));
        if (d.charge_power < -tol) flag("charge_limit", t, -d.charge_power);
        if (d.charge_power > d.u_charge * b.fleet_max_charge() + tol)
            flag("charge_limit", t, d.charge_power - d.u_charge * b.fleet_max_charge());
        if (d.discharge_power < -tol) flag("discharge_limit", t, -d.discharge_power);
        if (d.discharge_power > d.u_discharge * b.fleet_max_discharge() + tol)
            flag("discharge_limit", t, d.discharge_power - d.u_discharge * b.fleet_max_discharge());

        if (d.pv_spill < -tol) flag("pv_spill", t, -d.pv_spill);
        if (d.pv_spill > pv + tol) flag("pv_spill", t, d.pv_spill - pv);

        const double expected_soc =
            soc_prev + (b.eta_charge * d.charge_power - d.discharge_power / b.eta_discharge) * dt / cap;
        if (std::abs(d.soc_end - expected_soc) > tol) flag("soc_dynamics", t, std::abs(d.soc_end - expected_soc));
        if (d.soc_end < b.soc_abs_min - tol) flag("soc_bounds", t, b.soc_abs_min - d.soc_end);
        if (d.soc_end > b.soc_abs_max + tol) flag("soc_bounds", t, d.soc_end - b.soc_abs_max);
        soc_prev = d.soc_end;

        const bool inside = d.soc_end >= b.soc_green_min - tol && d.soc_end <= b.soc_green_max + tol;
        const bool outside = d.soc_end <= b.soc_green_min + tol || d.soc_end >= b.soc_green_max - tol;
        if ((d.u_red == 0 && !inside) || (d.u_red == 1 && !outside)) flag("red_zone_flag", t, 1.0);

        cycles += segment_cycles(b, dt, std::max(d.charge_power, 0.0), std::max(d.discharge_power, 0.0));
        if (cycles > b.rated_max_cycles + tol) flag("cycle_limit", t, cycles - b.rated_max_cycles);

        if (std::abs(d.cost - costs[t]) > tol * (1.0 + std::abs(costs[t])))
            flag("segment_cost", t, std::abs(d.cost - costs[t]));
    }
    const auto& c = s.cost;
    const double sum = c.battery_degradation + c.fuel + c.curtailment + c.red_zone;
    if (std::abs(sum - c.total) > 1e-9 * (1.0 + std::abs(c.total))) flag("cost_total", 0, std::abs(sum - c.total));
    for (double comp : {c.battery_degradation, c.fuel, c.curtailment, c.red_zone})
        if (comp < -tol) flag("cost_sign", 0, -comp);
    return out;
}

}  // namespace microgrid
