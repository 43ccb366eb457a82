#pragma once

#include <span>
#include <thread>
#include <vector>

#include "loadflow/balancer.hpp"
#include "loadflow/queue.hpp"
#include "loadflow/worker_pool.hpp"

namespace loadflow {

struct SchedulerConfig {
    double alpha = 2.0;   // queue-sensitivity scale
    double beta = 2.0;    // CPU-sensitivity scale
    double theta_c = 0.7; // utilization threshold
    double q_max = 100;   // batch queue capacity
    int delta_clip = 2;
    int initial_workers = 12;
    int max_workers = static_cast<int>(std::thread::hardware_concurrency());
    DurationMs tick = 500;
    double ema_alpha = 0.3; // smoothing for the queue-size moving average
};

struct SchedulerObservation {
    double q_size_avg = 0; // moving average of batch-queue length, in [0, q_max]
    double c_usage = 0;    // worker-pool busy fraction, in [0, 1]
};

struct SchedulerTraceRow {
    TimeMs t = 0;
    int workers = 0;
    double q_avg = 0;
    double c_usage = 0;
    int delta = 0;
};

// Worker-count adjustment: clip(round(alpha*(1 - q/q_max) + beta*(c - theta_c)),
// -delta_clip, +delta_clip), rounding half away from zero.
int compute_delta(const SchedulerObservation& obs, const SchedulerConfig& cfg);

// min(max_workers, max(1, current + delta)).
int update_workers(int current, int delta, const SchedulerConfig& cfg);

// Control loop: every tick, refreshes the queue-size EMA and the pool busy
// fraction, computes the delta, and resizes the pool. Exits once the pool has
// stopped. Appends one trace row per tick.
void scheduler_loop(WorkerPool& pool, std::span<BatchQueue* const> batch_queues,
                    const SchedulerConfig& cfg, Runtime& rt,
                    std::vector<SchedulerTraceRow>* trace = nullptr);

} // namespace loadflow
