#include "loadflow/worker_pool.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace loadflow {

WorkerPool::WorkerPool(Runtime& rt, PoolConfig cfg, BoundedQueue<Sample>& input,
                       Handler handler, SlotExitHook on_slot_exit)
    : rt_(rt),
      cfg_(cfg),
      input_(input),
      handler_(std::move(handler)),
      on_slot_exit_(std::move(on_slot_exit)),
      mu_(rt.make_mutex()),
      cv_(rt.make_cond()) {
    if (cfg_.max_workers < 1) throw std::invalid_argument("max_workers must be >= 1");
    if (cfg_.initial_workers < 1 || cfg_.initial_workers > cfg_.max_workers) {
        throw std::invalid_argument("initial_workers out of [1, max_workers]");
    }
    slot_active_.assign(cfg_.max_workers, false);
    slot_spawned_.assign(cfg_.max_workers, false);
    slot_busy_.assign(cfg_.max_workers, 0);
    slot_busy_since_.assign(cfg_.max_workers, -1);
}

void WorkerPool::start() {
    LockGuard g(*mu_);
    if (started_) throw std::logic_error("pool already started");
    started_ = true;
    target_ = cfg_.initial_workers;
    for (int i = 0; i < target_; ++i) {
        slot_active_[i] = true;
        spawn_slot(i);
    }
}

void WorkerPool::spawn_slot(int slot) {
    // Pre: mu_ held.
    slot_spawned_[slot] = true;
    ++spawned_count_;
    rt_.spawn("worker." + std::to_string(slot), [this, slot] { slot_loop(slot); });
}

void WorkerPool::resize(int target) {
    target = std::clamp(target, 1, cfg_.max_workers);
    LockGuard g(*mu_);
    if (!started_ || stop_) return;
    target_ = target;
    for (int i = 0; i < cfg_.max_workers; ++i) {
        bool want = i < target;
        if (want && !slot_active_[i]) {
            slot_active_[i] = true;
            if (!slot_spawned_[i]) spawn_slot(i);
        } else if (!want && slot_active_[i]) {
            slot_active_[i] = false; // worker parks after its current sample
        }
    }
    cv_->notify_all();
}

void WorkerPool::slot_loop(int slot) {
    for (;;) {
        {
            LockGuard g(*mu_);
            while (!slot_active_[slot] && !stop_) cv_->wait(*mu_);
            if (stop_) break;
        }
        auto s = input_.get();
        if (!s) {
            LockGuard g(*mu_);
            stop_ = true;
            cv_->notify_all();
            break;
        }
        handler_(slot, std::move(*s));
    }
    on_slot_exit_(slot);

    bool last = false;
    {
        LockGuard g(*mu_);
        ++exited_count_;
        last = exited_count_ == spawned_count_;
    }
    if (last) {
        // Queues of slots that never ran still need their close.
        for (int i = 0; i < cfg_.max_workers; ++i) {
            bool never_spawned;
            {
                LockGuard g(*mu_);
                never_spawned = !slot_spawned_[i];
            }
            if (never_spawned) on_slot_exit_(i);
        }
    }
}

int WorkerPool::target_active() const {
    LockGuard g(*mu_);
    return target_;
}

int WorkerPool::spawned() const {
    LockGuard g(*mu_);
    return spawned_count_;
}

bool WorkerPool::stopped() const {
    LockGuard g(*mu_);
    return stop_;
}

void WorkerPool::note_busy_start(int slot) {
    LockGuard g(*mu_);
    slot_busy_since_[slot] = rt_.now();
}

void WorkerPool::note_busy_end(int slot, DurationMs fg_ms) {
    LockGuard g(*mu_);
    slot_busy_[slot] += fg_ms;
    slot_busy_since_[slot] = -1;
}

DurationMs WorkerPool::effective_busy() const {
    LockGuard g(*mu_);
    const TimeMs now = rt_.now();
    DurationMs total = 0;
    for (int i = 0; i < cfg_.max_workers; ++i) {
        total += slot_busy_[i];
        if (slot_busy_since_[i] >= 0) total += now - slot_busy_since_[i];
    }
    return total;
}

} // namespace loadflow
