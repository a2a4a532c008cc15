#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "microgrid/risk.hpp"
#include "microgrid/scheduler.hpp"

using namespace microgrid;
using namespace microgrid::risk;

namespace {

std::vector<double> one_to_ten() {
    std::vector<double> v(10);
    std::iota(v.begin(), v.end(), 1.0);
    return v;
}

std::vector<double> nine_zeros_and_ten() {
    std::vector<double> v(9, 0.0);
    v.push_back(10.0);
    return v;
}

// Worst-tail mean with a fractional last atom.
double tail_mean(std::vector<double> v, double tail) {
    std::sort(v.begin(), v.end(), std::greater<>());
    double mass = tail * static_cast<double>(v.size()), sum = 0.0;
    for (double x : v) {
        const double w = std::min(1.0, mass);
        sum += w * x;
        mass -= w;
        if (mass <= 0.0) break;
    }
    return sum / (tail * static_cast<double>(v.size()));
}

LossMatrix matrix_from(const std::vector<std::vector<double>>& values, double tail) {
    LossMatrix m;
    m.values = values;
    m.tail_fraction = tail;
    for (std::size_t s = 0; s < values.size(); ++s) {
        m.scenario_ids.push_back("s" + std::to_string(s));
        m.denominator_demand.push_back(std::vector<double>(values[s].size(), 20.0));
    }
    return m;
}

}  // namespace

TEST_CASE("shortfall is the clipped residual") {
    CHECK(shortfall(12.0, 5.0, 3.75) == doctest::Approx(3.25));
    CHECK(shortfall(-4.0, -4.0, 0.0) == 0.0);
    CHECK(shortfall(10.0, 20.0, 0.0) == 0.0);
}

TEST_CASE("value at risk examples") {
    CHECK(empirical_var(nine_zeros_and_ten(), 0.10) == 0.0);
    CHECK(empirical_var(std::vector<double>(7, 5.0), 0.3) == 5.0);
    CHECK(empirical_var(one_to_ten(), 0.20) == 8.0);
}

TEST_CASE("conditional value at risk examples") {
    CHECK(empirical_cvar(nine_zeros_and_ten(), 0.10).cvar == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(empirical_cvar(std::vector<double>(13, 4.5), 0.05).cvar == doctest::Approx(4.5).epsilon(1e-12));
    const auto r = empirical_cvar(one_to_ten(), 0.20);
    CHECK(r.cvar == doctest::Approx(9.5).epsilon(1e-12));
    CHECK(r.alpha_star >= 8.0);
    CHECK(r.alpha_star <= 9.0);
}

TEST_CASE("fractional tails weight the boundary sample") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 30.0);
    std::vector<double> v(187);
    for (auto& x : v) x = u(rng);
    CHECK(empirical_cvar(v, 0.05).cvar == doctest::Approx(tail_mean(v, 0.05)).epsilon(1e-12));
}

TEST_CASE("risk measures reject bad input") {
    const std::vector<double> empty;
    CHECK_THROWS_AS(empirical_var(empty, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(empirical_cvar(empty, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(empirical_cvar(one_to_ten(), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(empirical_cvar(one_to_ten(), 1.0), std::invalid_argument);
}

TEST_CASE("coherence properties on random samples") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 1 + rng() % 150;
        std::vector<double> v(n);
        for (auto& x : v) x = rng() % 3 ? 40.0 * u(rng) : 0.0;
        const double tail = 0.01 + 0.98 * u(rng);
        const double cvar = empirical_cvar(v, tail).cvar;
        CHECK(cvar >= empirical_var(v, tail) - 1e-12);
        CHECK(cvar <= *std::max_element(v.begin(), v.end()) + 1e-12);
        CHECK(cvar == doctest::Approx(tail_mean(v, tail)).epsilon(1e-9));

        const double c = 10.0 * u(rng), k = 3.0 * u(rng);
        std::vector<double> shifted = v, scaled = v;
        for (auto& x : shifted) x += c;
        for (auto& x : scaled) x *= k;
        CHECK(std::abs(empirical_cvar(shifted, tail).cvar - (cvar + c)) <= 1e-9);
        CHECK(std::abs(empirical_cvar(scaled, tail).cvar - k * cvar) <= 1e-9);

        const double wider = std::min(0.99, tail + 0.3 * u(rng));
        CHECK(empirical_cvar(v, wider).cvar <= cvar + 1e-12);
    }
}

TEST_CASE("adding a dominating scenario never lowers any segment's cVaR") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<std::vector<double>> values(30, std::vector<double>(6));
    for (auto& row : values)
        for (auto& x : row) x = rng() % 2 ? u(rng) : 0.0;
    const auto before = risk_report(matrix_from(values, 0.1));
    std::vector<double> worst(6, 0.0);
    for (const auto& row : values)
        for (std::size_t t = 0; t < 6; ++t) worst[t] = std::max(worst[t], row[t] + 1.0);
    values.push_back(worst);
    const auto after = risk_report(matrix_from(values, 0.1));
    for (std::size_t t = 0; t < 6; ++t) CHECK(after.cvar_per_segment[t] >= before.cvar_per_segment[t] - 1e-12);
}

TEST_CASE("all-zero matrix gives an empty report") {
    const auto r = risk_report(matrix_from(std::vector<std::vector<double>>(5, std::vector<double>(4, 0.0)), 0.05));
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(r.var_per_segment[t] == 0.0);
        CHECK(r.cvar_per_segment[t] == 0.0);
        CHECK(r.cvar_ratio_per_segment[t] == 0.0);
        CHECK(r.std_per_segment[t] == 0.0);
    }
    CHECK(r.active_scenarios.empty());
    CHECK(std::all_of(r.curtail_instances_per_scenario.begin(), r.curtail_instances_per_scenario.end(),
                      [](std::size_t c) { return c == 0; }));
}

TEST_CASE("active scenarios are counted once each") {
    std::vector<std::vector<double>> values(187, std::vector<double>(96, 0.0));
    for (std::size_t s = 0; s < 26; ++s) {
        values[s * 7][80] = 2.0;
        values[s * 7][81] = 1.0;
    }
    const auto r = risk_report(matrix_from(values, 0.05));
    CHECK(r.active_scenarios.size() == 26);
    CHECK(100.0 * 26.0 / 187.0 == doctest::Approx(13.9).epsilon(0.01));
    CHECK(r.tail_scenarios == 9);
}

TEST_CASE("hand-built matrix matches an independent recomputation") {
    // 10 scenarios x 4 segments, denominator 20 kW everywhere
    const std::vector<std::vector<double>> values = {
        {0, 0, 1, 0}, {0, 0, 0, 0}, {0, 2, 3, 0}, {0, 0, 0, 0}, {0, 0, 5, 4},
        {0, 0, 0, 0}, {0, 1, 2, 0}, {0, 0, 0, 0}, {0, 0, 0, 8}, {0, 0, 0, 0},
    };
    const auto r = risk_report(matrix_from(values, 0.2));
    // worst-2 means per column
    CHECK(r.cvar_per_segment[0] == 0.0);
    CHECK(r.cvar_per_segment[1] == doctest::Approx(1.5));
    CHECK(r.cvar_per_segment[2] == doctest::Approx(4.0));
    CHECK(r.cvar_per_segment[3] == doctest::Approx(6.0));
    CHECK(r.var_per_segment[2] == 2.0);  // 8th smallest
    CHECK(r.var_per_segment[3] == 0.0);
    CHECK(r.cvar_ratio_per_segment[3] == doctest::Approx(6.0 / 20.0));
    // population std of ratios among curtailing scenarios: column 2 has 1,3,5,2
    const double mean = (1 + 3 + 5 + 2) / 4.0 / 20.0;
    double ss = 0.0;
    for (double x : {1.0, 3.0, 5.0, 2.0}) ss += (x / 20.0 - mean) * (x / 20.0 - mean);
    CHECK(r.std_per_segment[2] == doctest::Approx(std::sqrt(ss / 4.0)));
    CHECK(r.std_per_segment[0] == 0.0);
    CHECK(r.std_per_segment[1] == doctest::Approx(0.5 / 20.0));
    CHECK(r.curtail_instances_per_scenario == std::vector<std::size_t>{1, 0, 2, 0, 2, 0, 2, 0, 1, 0});
    CHECK(r.active_scenarios == std::vector<std::string>{"s0", "s2", "s4", "s6", "s8"});
}

TEST_CASE("loss matrix mirrors scheduled curtailment") {
    const auto cfg = testing::small_config(3);
    const auto p = build_problem(cfg, testing::scenario({6.0, 30.0, 6.0}, {6.0, 0.0, 6.0}, "only"));

    Dispatch idle;
    idle.diesel = {0.0, 3.75, 0.0};
    idle.charge = {0.0, 0.0, 0.0};
    idle.discharge = {0.0, 5.0, 0.0};
    idle.curtailment = {0.0, 21.25, 0.0};
    idle.spill = {0.0, 0.0, 0.0};
    const auto with_curtail = assemble_schedule(p, idle);
    const auto m = build_loss_matrix({with_curtail}, {p}, 0.05);
    REQUIRE(m.values.size() == 1);
    CHECK(m.values[0] == std::vector<double>{0.0, 21.25, 0.0});
    CHECK(m.denominator_demand[0][1] == doctest::Approx(8.75));

    auto none = idle;
    none.diesel = {0.0, 0.0, 0.0};
    none.discharge = {0.0, 0.0, 0.0};
    const auto zero = build_problem(cfg, testing::scenario({6.0, 0.0, 6.0}, {6.0, 0.0, 6.0}, "only"));
    none.curtailment = {0.0, 0.0, 0.0};
    const auto mz = build_loss_matrix({assemble_schedule(zero, none)}, {zero}, 0.05);
    CHECK(mz.values[0] == std::vector<double>{0.0, 0.0, 0.0});

    auto inconsistent = with_curtail;
    inconsistent.decisions[1].curtailment = 10.0;
    CHECK_THROWS_AS(build_loss_matrix({inconsistent}, {p}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(build_loss_matrix({with_curtail, with_curtail}, {p}, 0.05), std::invalid_argument);
    auto renamed = with_curtail;
    renamed.scenario_id = "other";
    CHECK_THROWS_AS(build_loss_matrix({renamed}, {p}, 0.05), std::invalid_argument);
}
