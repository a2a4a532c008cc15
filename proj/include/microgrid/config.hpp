#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "microgrid/types.hpp"

namespace microgrid {

/// Reads a flat `key = value` config file. Keys are module-prefixed field
/// names (`bess.unit_count`, `diesel.p_max`, ...); missing keys keep their
/// defaults. Throws ConfigError on a missing file, a malformed line (with its
/// line number), an unknown key, or an invariant violation.
MicrogridConfig load_config(const std::filesystem::path& path);

MicrogridConfig parse_config(std::string_view text);

/// Every key, one per line, in a form parse_config reads back exactly.
std::string serialize_config(const MicrogridConfig& config);

/// Throws ConfigError naming the offending field(s).
void validate_config(const MicrogridConfig& config);

/// Day-ahead runs must cover exactly 24 hours.
void require_full_day(const TimeGrid& grid);

}  // namespace microgrid
