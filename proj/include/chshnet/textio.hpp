#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace chshnet {

// Shortest decimal form that round-trips the exact binary64 value.
std::string format_double(double value);

// Strict parsers; throw DataError on malformed input.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);
uint64_t parse_u64(std::string_view text);

// Plain comma split, no quoting (the CSV schemas here have no quoted fields).
std::vector<std::string> split_csv(std::string_view line);

// FNV-1a 64-bit, used for manifest/config fingerprints.
uint64_t fnv1a64(std::string_view data);
std::string hex64(uint64_t value);

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace chshnet
