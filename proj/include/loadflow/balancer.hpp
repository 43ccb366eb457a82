#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <vector>

#include "loadflow/queue.hpp"
#include "loadflow/sample.hpp"

namespace loadflow {

// Shared timeout threshold. Written by the profiler's maintenance loop,
// read by every preprocessing worker; reads always see a whole value.
struct TimeoutPolicy {
    enum class Source : std::uint8_t { configured, p75, p90 };

    std::atomic<DurationMs> t_out{kNoTimeout};
    std::atomic<Source> source{Source::configured};

    DurationMs timeout() const { return t_out.load(std::memory_order_relaxed); }
    void set(DurationMs v, Source s) {
        t_out.store(v, std::memory_order_relaxed);
        source.store(s, std::memory_order_relaxed);
    }
};

// A timed-out sample parked for background completion. resume_index is the
// transform that was in progress when the budget expired; its partial effect
// has been discarded and it re-executes from scratch. fg_costs holds the
// full durations of the transforms that did complete in the foreground.
struct TempItem {
    Sample sample;
    std::size_t resume_index = 0;
    std::vector<DurationMs> fg_costs;
};

using SampleQueue = BoundedQueue<Sample>;
using TempQueue = BoundedQueue<TempItem>;
using BatchQueue = BoundedQueue<Batch>;

enum class Route : std::uint8_t { fast, temp };

struct RouteResult {
    Route route = Route::fast;
    // Foreground time charged to the worker: the full chain cost when the
    // sample finished in budget, exactly t_out when it timed out.
    DurationMs foreground_ms = 0;
    std::size_t timeout_index = 0; // valid when route == temp
    std::vector<DurationMs> exec_costs; // per completed foreground transform
};

// Applies the sample's whole chain under a cumulative budget of t_out.
// Within budget: sample completes, classification=fast, enqueued to fast_q.
// Budget exceeded: the in-progress transform's effect is discarded, the
// sample is enqueued to temp_q as (sample, index) with classification=slow.
// Synthetic chains interrupt at exactly t_out of elapsed work (the budget is
// inclusive: a chain costing exactly t_out is fast); real-function chains
// check cooperatively after each transform completes.
// Pre: sample.next_index == 0 and classification == unclassified.
RouteResult process_sample(Sample sample, DurationMs t_out, SampleQueue& fast_q,
                           TempQueue& temp_q, Runtime& rt, Rng& rng);

// Long-running loop: completes timed-out samples off the critical path.
// For each (sample, i) it re-executes transforms i..n-1 from scratch and
// enqueues the finished sample to slow_q. Returns when temp_q is drained.
// on_complete (optional) receives the finished sample, the full per-transform
// durations (foreground + background), and the background time spent.
using ResumeHook =
    std::function<void(const Sample&, const std::vector<DurationMs>&, DurationMs)>;
void resume_slow(TempQueue& temp_q, SampleQueue& slow_q, Runtime& rt, Rng& rng,
                 const ResumeHook& on_complete = nullptr);

} // namespace loadflow
