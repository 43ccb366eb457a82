#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "loadflow/queue.hpp"
#include "loadflow/sample.hpp"

namespace loadflow {

struct PoolConfig {
    int initial_workers = 12;
    int max_workers = 12;
};

// Resizable pool of preprocessing workers. Slots [0, target) are active;
// resize() parks or wakes slots at sample boundaries, so an in-flight sample
// is always finished (or handed to the temp queue) before its worker retires.
// The pool winds down once the input queue drains: every spawned slot exits,
// and the last one to leave fires the exit hook for slots that never ran so
// downstream queues always get closed.
class WorkerPool {
public:
    using Handler = std::function<void(int slot, Sample&&)>;
    using SlotExitHook = std::function<void(int slot)>;

    WorkerPool(Runtime& rt, PoolConfig cfg, BoundedQueue<Sample>& input,
               Handler handler, SlotExitHook on_slot_exit);

    void start(); // activate initial_workers

    // Clamped to [1, max_workers]; ignored once the input is exhausted.
    void resize(int target);

    int target_active() const;
    int spawned() const;
    bool stopped() const;

    // Foreground-busy bookkeeping, reported by the handler around each
    // sample. effective_busy() includes an estimate for in-progress samples
    // so utilization can be sampled mid-sample.
    void note_busy_start(int slot);
    void note_busy_end(int slot, DurationMs fg_ms);
    DurationMs effective_busy() const;

private:
    void spawn_slot(int slot);
    void slot_loop(int slot);

    Runtime& rt_;
    PoolConfig cfg_;
    BoundedQueue<Sample>& input_;
    Handler handler_;
    SlotExitHook on_slot_exit_;

    mutable std::unique_ptr<Mutex> mu_;
    std::unique_ptr<Cond> cv_;
    std::vector<bool> slot_active_;
    std::vector<bool> slot_spawned_;
    std::vector<DurationMs> slot_busy_;
    std::vector<TimeMs> slot_busy_since_; // -1 when idle
    int target_ = 0;
    int spawned_count_ = 0;
    int exited_count_ = 0;
    bool stop_ = false;
    bool started_ = false;
};

} // namespace loadflow
