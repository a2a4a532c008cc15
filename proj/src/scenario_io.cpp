#include "microgrid/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "microgrid/format.hpp"
#include "microgrid/scheduler.hpp"

namespace microgrid::io {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(line);
    }
    return out;
}

bool valid_id(const std::string& id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
}

double round_micro(double v) { return std::round(v * 1e6) / 1e6; }

// Linear interpolation through (hour, value) knots.
double interpolate(const std::vector<std::pair<double, double>>& knots, double hour) {
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (hour <= knots[i].first) {
            const auto [h0, v0] = knots[i - 1];
            const auto [h1, v1] = knots[i];
            return v0 + (v1 - v0) * (hour - h0) / (h1 - h0);
        }
    }
    return knots.back().second;
}

double field(const std::vector<std::string>& cols, std::size_t i, const std::string& where) {
    double v = 0.0;
    if (i >= cols.size() || !parse_double(cols[i], v)) throw ScenarioError(where + ": malformed number");
    return v;
}

}  // namespace

std::uint64_t SplitMix64::mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() {
    state_ += kGolden;
    return mix(state_);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string segment_column(std::size_t index, std::size_t count) {
    const std::size_t width = std::max<std::size_t>(3, std::to_string(count).size());
    std::string digits = std::to_string(index + 1);
    return "s" + std::string(width - digits.size(), '0') + digits;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

BaseProfiles default_base_profiles(const TimeGrid& grid) {
    // Ten homes, kW.
    static const std::vector<std::pair<double, double>> demand = {
        {0.0, 12.1},   {4.0, 9.35},   {6.0, 10.45},  {7.5, 16.5},   {9.0, 14.3},   {12.0, 12.65},
        {15.0, 14.85}, {17.5, 23.1},  {19.5, 27.5},  {21.0, 25.3},  {23.0, 16.5},  {24.0, 12.1},
    };
    constexpr double kPeakPv = 40.0;  // 10 homes x 4 kW
    constexpr double kNoon = 13.0, kHalfWidth = 6.5;
    BaseProfiles p;
    for (std::size_t t = 0; t < grid.segment_count; ++t) {
        const double hour = (static_cast<double>(t) + 0.5) * grid.segment_hours;
        p.demand_kw.push_back(round_micro(interpolate(demand, std::fmod(hour, 24.0))));
        const double x = (std::fmod(hour, 24.0) - kNoon) / kHalfWidth;
        const double bell = std::abs(x) < 1.0 ? std::pow(std::cos(0.5 * std::numbers::pi * x), 2) : 0.0;
        p.pv_kw.push_back(round_micro(kPeakPv * bell));
    }
    return p;
}

std::string base_profiles_csv(const BaseProfiles& profiles) {
    std::string out = "segment,demand_kw,pv_kw\n";
    for (std::size_t t = 0; t < profiles.demand_kw.size(); ++t)
        out += std::to_string(t + 1) + "," + format_fixed(profiles.demand_kw[t], 6) + "," +
               format_fixed(profiles.pv_kw[t], 6) + "\n";
    return out;
}

BaseProfiles read_base_profiles(const std::filesystem::path& path, const TimeGrid& grid) {
    const auto lines = lines_of(read_text(path));
    if (lines.empty() || lines[0] != "segment,demand_kw,pv_kw")
        throw ScenarioError(path.string() + ": expected header segment,demand_kw,pv_kw");
    BaseProfiles p;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cols = split(lines[i]);
        const std::string where = path.string() + " line " + std::to_string(i + 1);
        if (cols.size() != 3) throw ScenarioError(where + ": expected 3 columns");
        const double d = field(cols, 1, where), pv = field(cols, 2, where);
        if (d < 0 || pv < 0) throw ScenarioError(where + ": negative profile value");
        p.demand_kw.push_back(d);
        p.pv_kw.push_back(pv);
    }
    if (p.demand_kw.size() != grid.segment_count)
        throw ScenarioError(path.string() + ": " + std::to_string(p.demand_kw.size()) + " profile rows for a " +
                            std::to_string(grid.segment_count) + "-segment grid");
    return p;
}

GeneratorSpec default_generator_spec(const TimeGrid& grid) {
    GeneratorSpec spec;
    auto base = default_base_profiles(grid);
    spec.base_demand_profile = std::move(base.demand_kw);
    spec.base_pv_profile = std::move(base.pv_kw);
    return spec;
}

ScenarioSet generate_scenarios(const GeneratorSpec& spec, const TimeGrid& grid) {
    const std::size_t n = grid.segment_count;
    if (spec.base_demand_profile.size() != n || spec.base_pv_profile.size() != n)
        throw ScenarioError("generator: base profiles must have one value per segment");
    if (spec.demand_spread < 0 || spec.pv_spread < 0) throw ScenarioError("generator: spreads must be >= 0");
    if (spec.heavy_tail_share < 0 || spec.heavy_tail_share > 1)
        throw ScenarioError("generator: heavy_tail_share must lie in [0, 1]");
    for (std::size_t t = 0; t < n; ++t)
        if (spec.base_demand_profile[t] < 0 || spec.base_pv_profile[t] < 0)
            throw ScenarioError("generator: base profiles must be nonnegative");

    // Mean-one lognormal multipliers with the requested coefficient of variation.
    const double sd_d = std::sqrt(std::log1p(spec.demand_spread * spec.demand_spread));
    const double sd_p = std::sqrt(std::log1p(spec.pv_spread * spec.pv_spread));

    ScenarioSet set;
    set.source = ScenarioSource::synthetic;
    set.seed = spec.seed;
    set.grid = grid;
    const std::size_t width = std::max<std::size_t>(3, std::to_string(spec.scenario_count).size());
    for (std::size_t i = 0; i < spec.scenario_count; ++i) {
        SplitMix64 rng(SplitMix64::mix(spec.seed + (static_cast<std::uint64_t>(i) + 1) * kGolden));
        const bool heavy = rng.uniform() < spec.heavy_tail_share;
        const double scale = heavy ? 1.5 : 1.0;
        Scenario s;
        const std::string num = std::to_string(i + 1);
        s.id = "day-" + std::string(width - num.size(), '0') + num;
        for (std::size_t t = 0; t < n; ++t) {
            const double zd = rng.normal();
            const double zp = rng.normal();
            const double demand = spec.base_demand_profile[t] * std::exp(sd_d * zd - 0.5 * sd_d * sd_d) * scale;
            const double pv_cap = spec.base_pv_profile[t] * 1.1;
            const double pv = std::min(spec.base_pv_profile[t] * std::exp(sd_p * zp - 0.5 * sd_p * sd_p), pv_cap);
            s.demand_total.push_back(round_micro(demand));
            s.pv_generation.push_back(round_micro(pv));
        }
        set.scenarios.push_back(std::move(s));
    }
    return set;
}

ScenarioSet parse_scenarios(const std::string& text, const TimeGrid& grid) {
    const auto lines = lines_of(text);
    ScenarioSet set;
    set.grid = grid;
    std::size_t header_cols = 0;
    std::map<std::string, std::size_t> index;
    std::vector<std::pair<bool, bool>> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& line = lines[i];
        const std::string where = "line " + std::to_string(i + 1);
        if (line.empty() || line[0] == '#') continue;
        const auto cols = split(line);
        if (header_cols == 0) {
            if (cols.size() < 3 || cols[0] != "scenario_id" || cols[1] != "kind")
                throw ScenarioError(where + ": expected header scenario_id,kind,s001,...");
            header_cols = cols.size();
            continue;
        }
        const std::string& id = cols[0];
        if (!valid_id(id)) throw ScenarioError(where + ": invalid scenario id `" + id + "`");
        if (cols.size() < 2) throw ScenarioError(where + ": missing kind for scenario " + id);
        const std::string& kind = cols[1];
        if (kind != "demand_kw" && kind != "pv_kw")
            throw ScenarioError(where + ": scenario " + id + " has unknown kind `" + kind + "`");
        const std::size_t values = cols.size() - 2;
        if (values != grid.segment_count)
            throw ScenarioError(where + ": scenario " + id + " " + kind + " has " + std::to_string(values) +
                                " values, grid has " + std::to_string(grid.segment_count) + " segments");

        auto [it, inserted] = index.try_emplace(id, set.scenarios.size());
        if (inserted) {
            set.scenarios.push_back({id, {}, {}});
            seen.emplace_back(false, false);
        }
        auto& sc = set.scenarios[it->second];
        auto& flags = seen[it->second];
        bool& done = kind == "demand_kw" ? flags.first : flags.second;
        if (done) throw ScenarioError(where + ": duplicate " + kind + " row for scenario " + id);
        done = true;
        auto& target = kind == "demand_kw" ? sc.demand_total : sc.pv_generation;
        for (std::size_t t = 0; t < values; ++t) {
            const std::string cell = where + " column " + segment_column(t, grid.segment_count) + " (scenario " + id + ")";
            const double v = field(cols, t + 2, cell);
            if (v < 0.0 || !std::isfinite(v)) throw ScenarioError(cell + ": negative or non-finite value " + cols[t + 2]);
            target.push_back(v);
        }
    }
    if (header_cols == 0) throw ScenarioError("scenario file has no header");
    if (header_cols - 2 != grid.segment_count)
        throw ScenarioError("scenario header has " + std::to_string(header_cols - 2) + " segment columns, grid has " +
                            std::to_string(grid.segment_count));
    for (std::size_t k = 0; k < set.scenarios.size(); ++k)
        if (!seen[k].first || !seen[k].second)
            throw ScenarioError("scenario " + set.scenarios[k].id + " lacks a " +
                                (seen[k].first ? "pv_kw" : "demand_kw") + " row");
    return set;
}

ScenarioSet read_scenarios(const std::filesystem::path& path, const TimeGrid& grid) {
    try {
        auto set = parse_scenarios(read_text(path), grid);
        set.source = ScenarioSource::file;
        return set;
    } catch (const ScenarioError& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
}

std::string scenarios_csv(const ScenarioSet& set) {
    std::string out;
    if (set.source == ScenarioSource::synthetic)
        out += "# synthetic scenarios: prng=" + std::string(kPrngName) + " seed=" + std::to_string(set.seed) +
               " count=" + std::to_string(set.scenarios.size()) + "\n";
    out += "scenario_id,kind";
    for (std::size_t t = 0; t < set.grid.segment_count; ++t) out += "," + segment_column(t, set.grid.segment_count);
    out += "\n";
    for (const auto& s : set.scenarios) {
        for (int k = 0; k < 2; ++k) {
            out += s.id + (k == 0 ? ",demand_kw" : ",pv_kw");
            for (double v : k == 0 ? s.demand_total : s.pv_generation) out += "," + format_fixed(v, 6);
            out += "\n";
        }
    }
    return out;
}

namespace {
const char* kScheduleHeader =
    "segment,diesel_kw,bess_kw,charge_kw,discharge_kw,curtail_kw,soc_frac,u_c,u_d,u_di,u_r,cost_usd,pv_spill_kw";
}

std::string schedule_csv(const Schedule& schedule) {
    std::string out = std::string(kScheduleHeader) + "\n";
    for (std::size_t t = 0; t < schedule.decisions.size(); ++t) {
        const auto& d = schedule.decisions[t];
        out += std::to_string(t + 1);
        for (double v : {d.diesel_power, d.bess_power, d.charge_power, d.discharge_power, d.curtailment, d.soc_end})
            out += "," + format_double(v);
        for (int v : {d.u_charge, d.u_discharge, d.u_diesel, d.u_red}) out += "," + std::to_string(v);
        out += "," + format_double(d.cost) + "," + format_double(d.pv_spill) + "\n";
    }
    return out;
}

void write_schedule_csv(const Schedule& schedule, const std::filesystem::path& path) {
    write_text(path, schedule_csv(schedule));
}

Schedule read_schedule_csv(const std::filesystem::path& path, const DispatchProblem& problem) {
    const auto lines = lines_of(read_text(path));
    if (lines.empty() || lines[0] != kScheduleHeader)
        throw ScenarioError(path.string() + ": unexpected schedule header");
    Schedule s;
    s.scenario_id = problem.scenario.id;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cols = split(lines[i]);
        const std::string where = path.string() + " line " + std::to_string(i + 1);
        if (cols.size() != 13) throw ScenarioError(where + ": expected 13 columns");
        SegmentDecision d;
        d.diesel_power = field(cols, 1, where);
        d.bess_power = field(cols, 2, where);
        d.charge_power = field(cols, 3, where);
        d.discharge_power = field(cols, 4, where);
        d.curtailment = field(cols, 5, where);
        d.soc_end = field(cols, 6, where);
        d.u_charge = static_cast<int>(field(cols, 7, where));
        d.u_discharge = static_cast<int>(field(cols, 8, where));
        d.u_diesel = static_cast<int>(field(cols, 9, where));
        d.u_red = static_cast<int>(field(cols, 10, where));
        d.cost = field(cols, 11, where);
        d.pv_spill = field(cols, 12, where);
        const std::size_t t = s.decisions.size();
        if (t < problem.segments()) d.total_served = problem.scenario.demand_total[t] - d.curtailment;
        s.decisions.push_back(d);
    }
    segment_costs(s.decisions, problem, &s.cost);
    return s;
}

void write_risk_csv(const risk::RiskReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    std::string a = "segment,var_kw,cvar_kw,cvar_ratio\n";
    for (std::size_t t = 0; t < r.var_per_segment.size(); ++t)
        a += std::to_string(t + 1) + "," + format_double(r.var_per_segment[t]) + "," +
             format_double(r.cvar_per_segment[t]) + "," + format_double(r.cvar_ratio_per_segment[t]) + "\n";
    write_text(dir / "var_cvar_per_segment.csv", a);

    std::string b = "scenario_id,curtail_segments\n";
    for (std::size_t s = 0; s < r.scenario_ids.size(); ++s)
        b += r.scenario_ids[s] + "," + std::to_string(r.curtail_instances_per_scenario[s]) + "\n";
    write_text(dir / "curtail_instances.csv", b);

    std::string c = "segment,std_ratio\n";
    for (std::size_t t = 0; t < r.std_per_segment.size(); ++t)
        c += std::to_string(t + 1) + "," + format_double(r.std_per_segment[t]) + "\n";
    write_text(dir / "std_per_segment.csv", c);

    std::string d = "scenario_id\n";
    for (const auto& id : r.active_scenarios) d += id + "\n";
    write_text(dir / "active_scenarios.csv", d);
}

risk::RiskReport read_risk_csv(const std::filesystem::path& dir) {
    risk::RiskReport r;
    auto rows = [&dir](const char* name, const char* header) {
        const auto path = dir / name;
        auto lines = lines_of(read_text(path));
        if (lines.empty() || lines[0] != header) throw ScenarioError(path.string() + ": unexpected header");
        std::vector<std::vector<std::string>> out;
        for (std::size_t i = 1; i < lines.size(); ++i)
            if (!lines[i].empty()) out.push_back(split(lines[i]));
        return out;
    };
    for (const auto& c : rows("var_cvar_per_segment.csv", "segment,var_kw,cvar_kw,cvar_ratio")) {
        r.var_per_segment.push_back(field(c, 1, "var_cvar_per_segment.csv"));
        r.cvar_per_segment.push_back(field(c, 2, "var_cvar_per_segment.csv"));
        r.cvar_ratio_per_segment.push_back(field(c, 3, "var_cvar_per_segment.csv"));
    }
    for (const auto& c : rows("curtail_instances.csv", "scenario_id,curtail_segments")) {
        r.scenario_ids.push_back(c.at(0));
        r.curtail_instances_per_scenario.push_back(static_cast<std::size_t>(field(c, 1, "curtail_instances.csv")));
    }
    for (const auto& c : rows("std_per_segment.csv", "segment,std_ratio"))
        r.std_per_segment.push_back(field(c, 1, "std_per_segment.csv"));
    for (const auto& c : rows("active_scenarios.csv", "scenario_id")) r.active_scenarios.push_back(c.at(0));
    return r;
}

}  // namespace microgrid::io
