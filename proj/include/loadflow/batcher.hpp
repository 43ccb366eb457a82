#pragma once

#include <span>
#include <vector>

#include "loadflow/balancer.hpp"
#include "loadflow/queue.hpp"
#include "loadflow/sample.hpp"

namespace loadflow {

struct BatcherConfig {
    std::size_t batch_size = 1;
    DurationMs sleep_ms = 10; // when both fast and slow sources are empty
};

// One row per filled batch slot; used by tests to verify fast-first priority.
struct SlotDecision {
    TimeMs t = 0;
    QueueRole source = QueueRole::fast;
    std::uint64_t sample_id = 0;
    bool fast_available = false;
    bool slow_available = false;
};

struct BatcherTrace {
    std::vector<SlotDecision> slots;
    std::vector<std::pair<TimeMs, std::size_t>> batch_queue_occupancy;
};

// Long-running batch construction loop: fills batches of exactly batch_size,
// preferring fast queues (round-robin) and falling back to slow queues,
// sleeping sleep_ms when neither has samples. Exits when every source queue
// is drained, flushing a final partial batch if one is in progress, then
// closes batch_q.
void build_batches(std::span<SampleQueue* const> fast_qs,
                   std::span<SampleQueue* const> slow_qs, BatchQueue& batch_q,
                   const BatcherConfig& cfg, Runtime& rt,
                   BatcherTrace* trace = nullptr);

} // namespace loadflow
