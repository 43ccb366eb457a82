#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "loadflow/balancer.hpp"
#include "loadflow/queue.hpp"

namespace loadflow {

// Simulated accelerator consumer. Stands in for one GPU: a fixed per-batch
// transfer latency plus a fixed per-batch compute duration.
struct ConsumerConfig {
    DurationMs compute_per_batch = 200;
    DurationMs transfer_per_batch = 0;
    DurationMs poll_sleep = 10;
    bool prefetch = true; // overlap batch i's transfer with batch i-1's compute
    std::optional<std::int64_t> max_batches;
    std::optional<DurationMs> horizon_ms; // stop waiting at this run time
};

struct BatchEvent {
    TimeMs compute_end = 0;
    TimeMs sealed_at = 0;
    std::int64_t n_samples = 0;
    double bytes = 0;
};

struct ConsumerStats {
    TimeMs start = 0;
    TimeMs end = 0;
    DurationMs busy = 0;          // compute time only
    DurationMs idle_accounted = 0; // polls + transfer stalls, as accumulated
    std::int64_t batches = 0;
    std::int64_t samples = 0;
    double bytes = 0;
    std::vector<BatchEvent> events;
    std::vector<std::uint64_t> consumed_ids;

    TimeMs span() const { return end - start; }
    DurationMs idle() const { return span() - busy; }
    double busy_fraction() const {
        return span() > 0 ? static_cast<double>(busy) / static_cast<double>(span()) : 0.0;
    }
    double idle_fraction() const { return span() > 0 ? 1.0 - busy_fraction() : 0.0; }
};

// Returns the head batch, polling in poll_sleep quanta while the queue is
// empty; idle time accrues per poll. Returns nullopt at end of stream or when
// the horizon expires.
std::optional<Batch> next_batch(BatchQueue& q, const ConsumerConfig& cfg, Runtime& rt,
                                ConsumerStats& stats);

// Consumes batches until the queue drains (or max_batches / horizon hits).
// With prefetch on, batch i's transfer overlaps batch i-1's compute, so the
// steady-state per-batch wall time is max(compute, transfer) when supply is
// unconstrained.
ConsumerStats run_consumer(const ConsumerConfig& cfg, BatchQueue& q, Runtime& rt);

} // namespace loadflow
