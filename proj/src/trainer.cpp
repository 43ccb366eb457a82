#include "loadflow/trainer.hpp"

#include <algorithm>

namespace loadflow {

std::optional<Batch> next_batch(BatchQueue& q, const ConsumerConfig& cfg, Runtime& rt,
                                ConsumerStats& stats) {
    for (;;) {
        if (auto b = q.try_get()) return b;
        if (q.drained()) return std::nullopt;
        if (cfg.horizon_ms && rt.now() - stats.start >= *cfg.horizon_ms) {
            return std::nullopt;
        }
        rt.sleep(cfg.poll_sleep);
        stats.idle_accounted += cfg.poll_sleep;
    }
}

ConsumerStats run_consumer(const ConsumerConfig& cfg, BatchQueue& q, Runtime& rt) {
    ConsumerStats stats;
    stats.start = rt.now();
    stats.end = stats.start;
    // Transfer engine availability: with prefetch, a sealed batch starts its
    // device transfer as soon as the previous transfer finishes, independent
    // of the compute loop.
    TimeMs transfer_free = stats.start;

    for (;;) {
        if (cfg.max_batches && stats.batches >= *cfg.max_batches) break;
        auto batch = next_batch(q, cfg, rt, stats);
        if (!batch) break;

        if (cfg.prefetch) {
            TimeMs transfer_end =
                std::max(batch->sealed_at, transfer_free) + cfg.transfer_per_batch;
            transfer_free = transfer_end;
            if (transfer_end > rt.now()) {
                // Transfer still in flight: stall until the batch is resident.
                DurationMs stall = transfer_end - rt.now();
                rt.sleep(stall);
                stats.idle_accounted += stall;
            }
        } else {
            // Serial transfer: starts only once the consumer asks for the batch.
            rt.sleep(cfg.transfer_per_batch);
            stats.idle_accounted += cfg.transfer_per_batch;
        }

        rt.sleep(cfg.compute_per_batch);
        stats.busy += cfg.compute_per_batch;

        stats.batches += 1;
        stats.samples += static_cast<std::int64_t>(batch->samples.size());
        const double bytes = batch->bytes_out();
        stats.bytes += bytes;
        for (const auto& s : batch->samples) stats.consumed_ids.push_back(s.id);
        stats.events.push_back(BatchEvent{rt.now(), batch->sealed_at,
                                          static_cast<std::int64_t>(batch->samples.size()),
                                          bytes});
        stats.end = rt.now();
    }
    stats.end = rt.now();
    return stats;
}

} // namespace loadflow
