#include "microgrid/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace microgrid::risk {
namespace {

void check_inputs(std::span<const double> losses, double tail_fraction) {
    if (losses.empty()) throw std::invalid_argument("empty loss sample");
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) throw std::invalid_argument("tail_fraction must lie in (0, 1)");
}

double ratio(double curtail, double served) { return served > 0.0 ? curtail / served : 0.0; }

}  // namespace

double shortfall(double net_load, double bess_power, double diesel_power) {
    return std::max(0.0, net_load - bess_power - diesel_power);
}

double empirical_var(std::span<const double> losses, double tail_fraction) {
    check_inputs(losses, tail_fraction);
    std::vector<double> sorted(losses.begin(), losses.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    // smallest k with k / n >= 1 - tail_fraction
    auto k = static_cast<std::size_t>(std::ceil((1.0 - tail_fraction) * n - 1e-9));
    k = std::clamp<std::size_t>(k, 1, sorted.size());
    return sorted[k - 1];
}

CvarResult empirical_cvar(std::span<const double> losses, double tail_fraction) {
    check_inputs(losses, tail_fraction);
    std::vector<double> sorted(losses.begin(), losses.end());
    std::sort(sorted.begin(), sorted.end());
    const double scale = 1.0 / (static_cast<double>(sorted.size()) * tail_fraction);

    CvarResult best{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (k > 0 && sorted[k] == sorted[k - 1]) continue;
        const double alpha = sorted[k];
        double excess = 0.0;
        for (std::size_t i = sorted.size(); i-- > k;) {
            if (sorted[i] <= alpha) break;
            excess += sorted[i] - alpha;
        }
        const double value = alpha + scale * excess;
        if (value < best.cvar) best = {value, alpha};
    }
    return best;
}

LossMatrix build_loss_matrix(const std::vector<Schedule>& schedules, const std::vector<DispatchProblem>& problems,
                             double tail_fraction) {
    if (schedules.size() != problems.size())
        throw std::invalid_argument("build_loss_matrix: " + std::to_string(schedules.size()) + " schedules but " +
                                    std::to_string(problems.size()) + " problems");
    LossMatrix m;
    m.tail_fraction = tail_fraction;
    for (std::size_t s = 0; s < schedules.size(); ++s) {
        const auto& sch = schedules[s];
        const auto& prob = problems[s];
        if (sch.scenario_id != prob.scenario.id)
            throw std::invalid_argument("build_loss_matrix: schedule " + sch.scenario_id + " paired with scenario " +
                                        prob.scenario.id);
        if (sch.decisions.size() != prob.segments() || (!m.values.empty() && prob.segments() != m.segment_count()))
            throw std::invalid_argument("build_loss_matrix: inconsistent segment counts for " + sch.scenario_id);
        std::vector<double> row, served;
        for (std::size_t t = 0; t < prob.segments(); ++t) {
            const auto& d = sch.decisions[t];
            const double loss = shortfall(prob.net_load[t], d.bess_power, d.diesel_power);
            if (std::abs(loss - d.curtailment) > 1e-6)
                throw std::invalid_argument("build_loss_matrix: scenario " + sch.scenario_id + " segment " +
                                            std::to_string(t + 1) + " shortfall " + std::to_string(loss) +
                                            " kW disagrees with scheduled curtailment " +
                                            std::to_string(d.curtailment) + " kW");
            row.push_back(loss);
            served.push_back(d.total_served);
        }
        m.values.push_back(std::move(row));
        m.denominator_demand.push_back(std::move(served));
        m.scenario_ids.push_back(sch.scenario_id);
    }
    return m;
}

RiskReport risk_report(const LossMatrix& matrix) {
    RiskReport r;
    r.tail_fraction = matrix.tail_fraction;
    r.scenario_ids = matrix.scenario_ids;
    const std::size_t ns = matrix.scenario_count();
    const std::size_t nt = matrix.segment_count();
    r.tail_scenarios = static_cast<std::size_t>(std::floor(static_cast<double>(ns) * matrix.tail_fraction + 1e-9));
    if (ns == 0) return r;

    std::vector<double> column(ns), ratios(ns);
    for (std::size_t t = 0; t < nt; ++t) {
        std::vector<double> curtailing;
        for (std::size_t s = 0; s < ns; ++s) {
            column[s] = matrix.values[s][t];
            ratios[s] = ratio(matrix.values[s][t], matrix.denominator_demand[s][t]);
            if (column[s] > kCurtailThreshold) curtailing.push_back(ratios[s]);
        }
        r.var_per_segment.push_back(empirical_var(column, matrix.tail_fraction));
        r.cvar_per_segment.push_back(empirical_cvar(column, matrix.tail_fraction).cvar);
        r.cvar_ratio_per_segment.push_back(empirical_cvar(ratios, matrix.tail_fraction).cvar);

        double sd = 0.0;
        if (!curtailing.empty()) {
            double mean = 0.0;
            for (double v : curtailing) mean += v;
            mean /= static_cast<double>(curtailing.size());
            double ss = 0.0;
            for (double v : curtailing) ss += (v - mean) * (v - mean);
            sd = std::sqrt(ss / static_cast<double>(curtailing.size()));
        }
        r.std_per_segment.push_back(sd);
    }
    for (std::size_t s = 0; s < ns; ++s) {
        const auto count = static_cast<std::size_t>(std::count_if(
            matrix.values[s].begin(), matrix.values[s].end(), [](double v) { return v > kCurtailThreshold; }));
        r.curtail_instances_per_scenario.push_back(count);
        if (count > 0) r.active_scenarios.push_back(matrix.scenario_ids[s]);
    }
    return r;
}

}  // namespace microgrid::risk
