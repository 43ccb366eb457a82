#pragma once

#include <cstdint>
#include <limits>

namespace loadflow {

// All pipeline timing is integer milliseconds since run start. Integer time
// keeps discrete-event ordering exact and makes virtual-mode runs
// byte-reproducible.
using TimeMs = std::int64_t;
using DurationMs = std::int64_t;

// Sentinel for "no timeout". Far below INT64_MAX so elapsed+cost never
// overflows.
inline constexpr DurationMs kNoTimeout = std::numeric_limits<std::int64_t>::max() / 4;

} // namespace loadflow
