#pragma once

namespace fracspde {

inline constexpr const char* version = "0.1.0";
// Bumped whenever the config schema changes incompatibly.
inline constexpr int config_format_version = 1;

}  // namespace fracspde
