#include "microgrid/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "microgrid/format.hpp"

namespace microgrid {
namespace {

struct Field {
    std::function<void(MicrogridConfig&, double)> set;
    std::function<double(const MicrogridConfig&)> get;
    bool integral = false;
};

template <typename Group, typename T>
Field member(Group MicrogridConfig::*group, T Group::*field) {
    Field f;
    f.set = [group, field](MicrogridConfig& c, double v) { (c.*group).*field = static_cast<T>(v); };
    f.get = [group, field](const MicrogridConfig& c) { return static_cast<double>((c.*group).*field); };
    f.integral = std::is_integral_v<T>;
    return f;
}

// Ordered so serialize_config output is stable.
const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"time.segment_count", member(&MicrogridConfig::time, &TimeGrid::segment_count)},
        {"time.segment_hours", member(&MicrogridConfig::time, &TimeGrid::segment_hours)},
        {"bess.unit_count", member(&MicrogridConfig::bess, &BessParams::unit_count)},
        {"bess.capacity_per_unit", member(&MicrogridConfig::bess, &BessParams::capacity_per_unit)},
        {"bess.initial_energy_per_unit", member(&MicrogridConfig::bess, &BessParams::initial_energy_per_unit)},
        {"bess.max_charge_per_unit", member(&MicrogridConfig::bess, &BessParams::max_charge_per_unit)},
        {"bess.max_discharge_per_unit", member(&MicrogridConfig::bess, &BessParams::max_discharge_per_unit)},
        {"bess.capital_cost", member(&MicrogridConfig::bess, &BessParams::capital_cost)},
        {"bess.red_zone_penalty", member(&MicrogridConfig::bess, &BessParams::red_zone_penalty)},
        {"bess.soc_green_min", member(&MicrogridConfig::bess, &BessParams::soc_green_min)},
        {"bess.soc_green_max", member(&MicrogridConfig::bess, &BessParams::soc_green_max)},
        {"bess.soc_abs_min", member(&MicrogridConfig::bess, &BessParams::soc_abs_min)},
        {"bess.soc_abs_max", member(&MicrogridConfig::bess, &BessParams::soc_abs_max)},
        {"bess.rated_max_cycles", member(&MicrogridConfig::bess, &BessParams::rated_max_cycles)},
        {"bess.gamma", member(&MicrogridConfig::bess, &BessParams::gamma)},
        {"bess.initial_cycles", member(&MicrogridConfig::bess, &BessParams::initial_cycles)},
        {"bess.eta_charge", member(&MicrogridConfig::bess, &BessParams::eta_charge)},
        {"bess.eta_discharge", member(&MicrogridConfig::bess, &BessParams::eta_discharge)},
        {"diesel.p_min", member(&MicrogridConfig::diesel, &DieselParams::p_min)},
        {"diesel.p_max", member(&MicrogridConfig::diesel, &DieselParams::p_max)},
        {"diesel.fuel_cost", member(&MicrogridConfig::diesel, &DieselParams::fuel_cost)},
        {"demand.epsilon", member(&MicrogridConfig::demand, &DemandParams::epsilon)},
        {"demand.curtail_cost", member(&MicrogridConfig::demand, &DemandParams::curtail_cost)},
    };
    return table;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

MicrogridConfig parse_config(std::string_view text) {
    MicrogridConfig config;
    std::map<std::string, const Field*, std::less<>> index;
    for (const auto& [key, field] : fields()) index.emplace(key, &field);

    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected `key = value`");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end())
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key `" + std::string(key) + "`");

        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v))
            throw ConfigError("config line " + std::to_string(line_no) + ": `" + std::string(key) +
                              "` has non-numeric value `" + std::string(value) + "`");
        if (it->second->integral && (v != std::floor(v) || v < 0))
            throw ConfigError("config line " + std::to_string(line_no) + ": `" + std::string(key) +
                              "` must be a nonnegative integer");
        it->second->set(config, v);
    }
    validate_config(config);
    return config;
}

MicrogridConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string serialize_config(const MicrogridConfig& config) {
    std::string out;
    for (const auto& [key, field] : fields()) {
        out += key;
        out += " = ";
        out += format_double(field.get(config));
        out += '\n';
    }
    return out;
}

void validate_config(const MicrogridConfig& c) {
    std::vector<std::string> bad;
    auto require = [&bad](bool ok, const std::string& msg) {
        if (!ok) bad.push_back(msg);
    };
    const auto& b = c.bess;
    require(c.time.segment_count >= 1, "time.segment_count must be >= 1");
    require(c.time.segment_hours > 0, "time.segment_hours must be > 0");
    require(b.unit_count >= 1, "bess.unit_count must be >= 1");
    require(b.capacity_per_unit > 0, "bess.capacity_per_unit must be > 0");
    require(b.initial_energy_per_unit >= 0, "bess.initial_energy_per_unit must be >= 0");
    require(b.max_charge_per_unit >= 0, "bess.max_charge_per_unit must be >= 0");
    require(b.max_discharge_per_unit >= 0, "bess.max_discharge_per_unit must be >= 0");
    require(b.capital_cost >= 0, "bess.capital_cost must be >= 0");
    require(b.red_zone_penalty >= 0, "bess.red_zone_penalty must be >= 0");
    require(0 <= b.soc_abs_min, "bess.soc_abs_min must be >= 0");
    require(b.soc_abs_min <= b.soc_green_min, "bess.soc_abs_min must be <= bess.soc_green_min");
    require(b.soc_green_min < b.soc_green_max, "bess.soc_green_min must be < bess.soc_green_max");
    require(b.soc_green_max <= b.soc_abs_max, "bess.soc_green_max must be <= bess.soc_abs_max");
    require(b.soc_abs_max <= 1, "bess.soc_abs_max must be <= 1");
    require(b.initial_cycles >= 0, "bess.initial_cycles must be >= 0");
    require(b.rated_max_cycles > b.initial_cycles, "bess.rated_max_cycles must exceed bess.initial_cycles");
    require(b.gamma > 0, "bess.gamma must be > 0");
    require(b.eta_charge > 0 && b.eta_charge <= 1, "bess.eta_charge must be in (0, 1]");
    require(b.eta_discharge > 0 && b.eta_discharge <= 1, "bess.eta_discharge must be in (0, 1]");
    if (b.capacity_per_unit > 0) {
        const double soc0 = b.initial_soc();
        require(soc0 >= b.soc_abs_min - 1e-12 && soc0 <= b.soc_abs_max + 1e-12,
                "bess.initial_energy_per_unit gives an initial SOC outside [bess.soc_abs_min, bess.soc_abs_max]");
    }
    require(c.diesel.p_min >= 0, "diesel.p_min must be >= 0");
    require(c.diesel.p_min <= c.diesel.p_max, "diesel.p_min must be <= diesel.p_max");
    require(c.diesel.fuel_cost >= 0, "diesel.fuel_cost must be >= 0");
    require(c.demand.epsilon > 0, "demand.epsilon must be > 0");
    require(c.demand.curtail_cost >= 0, "demand.curtail_cost must be >= 0");
    if (bad.empty()) return;
    std::string msg = "invalid config: ";
    for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? "; " : "") + bad[i];
    throw ConfigError(msg);
}

void require_full_day(const TimeGrid& grid) {
    if (std::abs(grid.horizon_hours() - 24.0) > 1e-9)
        throw ConfigError("time.segment_count * time.segment_hours must equal 24 h for a day-ahead run (got " +
                          format_double(grid.horizon_hours()) + " h)");
}

}  // namespace microgrid
