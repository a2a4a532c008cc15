#include <doctest.h>

#include <cstdlib>
#include <string>

#include "helpers.hpp"
#include "microgrid/scenario_io.hpp"

#if defined(_WIN32)
#define MICROGRID_EXIT_STATUS(s) (s)
#else
#include <sys/wait.h>
#define MICROGRID_EXIT_STATUS(s) (WIFEXITED(s) ? WEXITSTATUS(s) : -1)
#endif

using namespace microgrid;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const testing::TempDir& dir, const std::string& args) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + MICROGRID_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {MICROGRID_EXIT_STATUS(status), io::read_text(out), io::read_text(err)};
}

fs::path flat_scenarios(const testing::TempDir& dir, double demand, double pv, const std::string& id = "flat") {
    io::ScenarioSet set;
    set.scenarios.push_back(testing::flat_day(demand, pv, 96, id));
    const auto path = dir / ("scenarios_" + id + ".csv");
    io::write_text(path, io::scenarios_csv(set));
    return path;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("cli: light load schedules without curtailment") {
    testing::TempDir dir;
    const auto scen = flat_scenarios(dir, 2.0, 0.0);
    const auto out = dir / "out";
    const auto r = cli(dir, "risk --scenarios " + q(scen) + " --out " + q(out) + " --jobs 1");
    CHECK(r.code == 0);
    CHECK(r.out.find("no curtailment risk") != std::string::npos);
    CHECK(fs::exists(out / "schedule_flat.csv"));
    const auto summary = io::read_text(out / "summary.csv");
    CHECK(summary.rfind("scenario_id,total_cost_usd,curtailed_kwh,segments_curtailed\nflat,", 0) == 0);
    CHECK(summary.find(",0,0\n") != std::string::npos);

    const auto v = cli(dir, "validate --scenarios " + q(scen) + " --schedules " + q(out));
    CHECK(v.code == 0);
    CHECK(v.out.find("validated 1 schedules, 0 with violations") != std::string::npos);
}

TEST_CASE("cli: unservable priority load exits 2 and names segments") {
    testing::TempDir dir;
    const auto scen = flat_scenarios(dir, 500.0, 0.0, "heavy");
    const auto r = cli(dir, "schedule --scenarios " + q(scen) + " --out " + q(dir / "out") + " --jobs 1");
    CHECK(r.code == 2);
    CHECK(r.err.find("priority shortfall: scenario heavy segments 1,") != std::string::npos);
}

TEST_CASE("cli: a tampered schedule fails validation with exit 3") {
    testing::TempDir dir;
    const auto scen = flat_scenarios(dir, 2.0, 0.0);
    const auto out = dir / "out";
    REQUIRE(cli(dir, "schedule --scenarios " + q(scen) + " --out " + q(out) + " --jobs 1").code == 0);

    const auto path = out / "schedule_flat.csv";
    auto text = io::read_text(path);
    const auto line = text.find("\n10,");
    REQUIRE(line != std::string::npos);
    const auto field = line + 4;
    text.replace(field, text.find(',', field) - field, "3.5");
    io::write_text(path, text);

    const auto v = cli(dir, "validate --scenarios " + q(scen) + " --schedules " + q(out));
    CHECK(v.code == 3);
    CHECK(v.err.find("segment 10") != std::string::npos);
    CHECK(v.out.find("1 with violations") != std::string::npos);
}

TEST_CASE("cli: input errors exit 1") {
    testing::TempDir dir;
    const auto scen = flat_scenarios(dir, 2.0, 0.0);

    SUBCASE("missing scenario file") {
        const auto r = cli(dir, "schedule --scenarios " + q(dir / "absent.csv") + " --out " + q(dir / "o"));
        CHECK(r.code == 1);
        CHECK(r.err.find("absent.csv") != std::string::npos);
    }
    SUBCASE("invalid config") {
        io::write_text(dir / "bad.cfg", "bess.soc_green_min = 0.9\nbess.soc_green_max = 0.5\n");
        const auto r = cli(dir, "schedule --config " + q(dir / "bad.cfg") + " --scenarios " + q(scen) + " --out " +
                                    q(dir / "o"));
        CHECK(r.code == 1);
        CHECK(r.err.find("soc_green_min") != std::string::npos);
        CHECK(r.err.find("soc_green_max") != std::string::npos);
    }
    SUBCASE("schedule for an unknown scenario") {
        REQUIRE(cli(dir, "schedule --scenarios " + q(scen) + " --out " + q(dir / "o") + " --jobs 1").code == 0);
        const auto other = flat_scenarios(dir, 2.0, 0.0, "other");
        const auto r = cli(dir, "validate --scenarios " + q(other) + " --schedules " + q(dir / "o"));
        CHECK(r.code == 1);
        CHECK(r.err.find("no scenario flat") != std::string::npos);
    }
    SUBCASE("risk over a directory missing schedules") {
        fs::create_directories(dir / "empty");
        const auto r = cli(dir, "risk --scenarios " + q(scen) + " --schedules " + q(dir / "empty") + " --out " +
                                    q(dir / "o"));
        CHECK(r.code == 1);
        CHECK(r.err.find("missing schedule") != std::string::npos);
    }
    SUBCASE("bad flags") {
        CHECK(cli(dir, "risk --tail 2").code == 1);
        CHECK(cli(dir, "schedule --scenarios " + q(scen) + " --seed 3").code == 1);
        CHECK(cli(dir, "").code == 1);
    }
}

TEST_CASE("cli: generate writes the requested scenario set") {
    testing::TempDir dir;
    const auto r = cli(dir, "generate --seed 7 --count 9 --out " + q(dir / "gen"));
    CHECK(r.code == 0);
    const auto set = io::read_scenarios(dir / "gen" / "scenarios.csv", TimeGrid{});
    CHECK(set.scenarios.size() == 9);
    auto spec = io::default_generator_spec(TimeGrid{});
    spec.seed = 7;
    spec.scenario_count = 9;
    CHECK(io::read_text(dir / "gen" / "scenarios.csv") == io::scenarios_csv(io::generate_scenarios(spec, TimeGrid{})));
}
