#include "loadflow/batcher.hpp"

#include <optional>
#include <stdexcept>

namespace loadflow {

namespace {

// Round-robin try_get across a set of queues. On success advances the cursor
// past the queue that yielded, keeping drain order fair and deterministic.
std::optional<Sample> poll_round_robin(std::span<SampleQueue* const> qs,
                                       std::size_t& cursor) {
    for (std::size_t i = 0; i < qs.size(); ++i) {
        std::size_t idx = (cursor + i) % qs.size();
        if (auto s = qs[idx]->try_get()) {
            cursor = (idx + 1) % qs.size();
            return s;
        }
    }
    return std::nullopt;
}

bool any_nonempty(std::span<SampleQueue* const> qs) {
    for (auto* q : qs) {
        if (!q->empty()) return true;
    }
    return false;
}

bool all_drained(std::span<SampleQueue* const> qs) {
    for (auto* q : qs) {
        if (!q->drained()) return false;
    }
    return true;
}

} // namespace

void build_batches(std::span<SampleQueue* const> fast_qs,
                   std::span<SampleQueue* const> slow_qs, BatchQueue& batch_q,
                   const BatcherConfig& cfg, Runtime& rt, BatcherTrace* trace) {
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");

    std::size_t fast_cursor = 0;
    std::size_t slow_cursor = 0;
    Batch batch;
    batch.samples.reserve(cfg.batch_size);

    auto seal_and_publish = [&] {
        batch.sealed_at = rt.now();
        batch_q.put(std::move(batch));
        if (trace != nullptr) {
            trace->batch_queue_occupancy.emplace_back(rt.now(), batch_q.size());
        }
        batch = Batch{};
        batch.samples.reserve(cfg.batch_size);
    };

    for (;;) {
        bool fast_avail = false;
        bool slow_avail = false;
        if (trace != nullptr) {
            fast_avail = any_nonempty(fast_qs);
            slow_avail = any_nonempty(slow_qs);
        }

        QueueRole source = QueueRole::fast;
        auto s = poll_round_robin(fast_qs, fast_cursor);
        if (!s) {
            s = poll_round_robin(slow_qs, slow_cursor);
            source = QueueRole::slow;
        }
        if (!s) {
            if (all_drained(fast_qs) && all_drained(slow_qs)) {
                if (!batch.samples.empty()) seal_and_publish(); // end-of-epoch flush
                batch_q.close();
                return;
            }
            rt.sleep(cfg.sleep_ms);
            continue;
        }

        if (trace != nullptr) {
            trace->slots.push_back(
                SlotDecision{rt.now(), source, s->id, fast_avail, slow_avail});
        }
        batch.samples.push_back(std::move(*s));
        if (batch.samples.size() == cfg.batch_size) seal_and_publish();
    }
}

} // namespace loadflow
