#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "microgrid/types.hpp"

namespace testing {

inline microgrid::MicrogridConfig small_config(std::size_t segments, int units = 1) {
    microgrid::MicrogridConfig c;
    c.time.segment_count = segments;
    c.bess.unit_count = units;
    return c;
}

inline microgrid::Scenario scenario(std::vector<double> demand, std::vector<double> pv, std::string id = "s") {
    return {std::move(id), std::move(demand), std::move(pv)};
}

inline microgrid::Scenario flat_day(double demand, double pv, std::size_t n = 96, std::string id = "flat") {
    return {std::move(id), std::vector<double>(n, demand), std::vector<double>(n, pv)};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("microgrid-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testing
