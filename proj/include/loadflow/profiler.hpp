#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "loadflow/runtime.hpp"
#include "loadflow/time.hpp"

namespace loadflow {

struct TimeoutPolicy;

class InsufficientProfileData : public std::runtime_error {
public:
    InsufficientProfileData() : std::runtime_error("no profiling data recorded yet") {}
};

// Nearest-rank percentile: sorted ascending, element at 1-based index
// ceil(p/100 * n). p in (0, 100]. Throws InsufficientProfileData on empty
// input.
DurationMs percentile(std::vector<DurationMs> durations, double p);

struct SampleStats {
    std::uint64_t sample_id = 0;
    double size_bytes = 0;
    std::vector<DurationMs> per_transform;
    DurationMs total = 0; // == sum(per_transform)
    int transform_count = 0;
    bool slow = false;

    static SampleStats from_costs(std::uint64_t id, double size_bytes,
                                  std::vector<DurationMs> costs, bool slow);
};

struct ProfilerConfig {
    std::size_t window = 1024;
    DurationMs warmup = 10'000; // before the first percentile-based timeout
    DurationMs update_interval = 1'000;
    double escalate_threshold = 0.35;   // slow_rate above this: p75 -> p90
    double deescalate_threshold = 0.15; // sustained below this: p90 -> p75
    DurationMs initial_timeout = kNoTimeout;
};

// Sliding-window profile of per-sample preprocessing statistics. record() is
// called by every preprocessing and resume worker; update_timeout() runs in a
// single maintenance loop and republishes t_out as the current percentile of
// the window's totals. The percentile escalates 75 -> 90 when too large a
// fraction of the window was classified slow, and falls back once a full
// window stays below the de-escalation threshold.
class Profiler {
public:
    Profiler(Runtime& rt, ProfilerConfig cfg);

    void record(SampleStats stats);

    // Pre: at least one record. Returns the new t_out written to policy.
    DurationMs update_timeout(TimeoutPolicy& policy);

    int current_percentile() const;
    double slow_rate() const;
    std::size_t recorded_total() const;
    std::size_t window_size() const;

    // Flat per-sample dump of the current window.
    void dump_csv(std::ostream& out) const;

    const ProfilerConfig& config() const { return cfg_; }

private:
    ProfilerConfig cfg_;
    mutable std::unique_ptr<Mutex> mu_;
    std::deque<SampleStats> window_;
    std::size_t recorded_total_ = 0;
    int current_pct_ = 75;
};

// Maintenance loop: waits out the warm-up, then refreshes the timeout every
// update_interval until stop() returns true. Sleeps in update_interval-sized
// chunks so it notices stop promptly.
void profiler_loop(Profiler& prof, TimeoutPolicy& policy, Runtime& rt,
                   const std::function<bool()>& stop);

} // namespace loadflow
