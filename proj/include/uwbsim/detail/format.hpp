#pragma once

#include <cstdint>
#include <string>

namespace uwbsim::detail {

/// Shortest decimal form that parses back to the same double ("0.81" stays
/// "0.81"). Used everywhere bytes must be reproducible.
std::string format_double(double value);

/// Strict double parse of a whole token; nullopt on trailing garbage.
bool parse_double(const std::string& token, double& out);

bool parse_int64(const std::string& token, std::int64_t& out);

bool parse_uint64(const std::string& token, std::uint64_t& out);

}  // namespace uwbsim::detail
