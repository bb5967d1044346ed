#pragma once

#include "nstori/forcing.hpp"

#include <filesystem>
#include <string>

namespace nstori {

/// Forcing documents are JSON objects:
///
///   {"name": "...", "period": T, "kind": "piecewise" | "trig" | "table", "payload": ...}
///
///   piecewise: [{"breakpoint": b, "coeffs": [c0, c1, ...]}, ...]   (local variable t - b)
///   trig:      [{"k": k, "sin": a_k, "cos": b_k}, ...]
///   table:     {"samples": [v0, v1, ...], "order": 0 | 1}
///
/// Throws ConfigError on malformed documents.
PeriodicForcing parse_forcing(const std::string& text);
PeriodicForcing load_forcing(const std::filesystem::path& path);
std::string forcing_to_json(const PeriodicForcing& forcing);

} // namespace nstori
