#pragma once

#include <cassert>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "loadflow/runtime.hpp"

namespace loadflow {

// The four queue roles of the pipeline, plus the input feed channel.
enum class QueueRole : std::uint8_t { fast, slow, temp, batch, input };

inline const char* to_string(QueueRole r) {
    switch (r) {
        case QueueRole::fast: return "fast";
        case QueueRole::slow: return "slow";
        case QueueRole::temp: return "temp";
        case QueueRole::batch: return "batch";
        case QueueRole::input: return "input";
    }
    return "?";
}

// Raised by put() on a closed queue: the producer has no valid continuation.
class QueueClosedError : public std::runtime_error {
public:
    explicit QueueClosedError(const std::string& name)
        : std::runtime_error("queue closed: " + name) {}
};

// Bounded, blocking, FIFO multi-producer/multi-consumer channel. Items are
// delivered exactly once, in insertion order. Blocking works identically in
// realtime mode (condition variables) and virtual mode (event-engine
// suspension) because all waiting goes through the Runtime primitives.
//
// Shutdown protocol: close() stops further put()s (they throw
// QueueClosedError); get() keeps draining and returns nullopt once the queue
// is closed and empty.
template <typename T>
class BoundedQueue {
public:
    BoundedQueue(Runtime& rt, std::size_t capacity = 100,
                 QueueRole role = QueueRole::input, std::string name = "")
        : capacity_(capacity),
          role_(role),
          name_(name.empty() ? to_string(role) : std::move(name)),
          mu_(rt.make_mutex()),
          not_empty_(rt.make_cond()),
          not_full_(rt.make_cond()) {
        if (capacity_ == 0) throw std::invalid_argument("queue capacity must be > 0");
    }

    void put(T item) {
        LockGuard g(*mu_);
        while (items_.size() >= capacity_ && !closed_) not_full_->wait(*mu_);
        if (closed_) throw QueueClosedError(name_);
        items_.push_back(std::move(item));
        assert(items_.size() <= capacity_);
        not_empty_->notify_one();
    }

    std::optional<T> get() {
        LockGuard g(*mu_);
        while (items_.empty() && !closed_) not_empty_->wait(*mu_);
        if (items_.empty()) return std::nullopt; // closed and drained
        T v = std::move(items_.front());
        items_.pop_front();
        not_full_->notify_one();
        return v;
    }

    std::optional<T> try_get() {
        LockGuard g(*mu_);
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        not_full_->notify_one();
        return v;
    }

    void close() {
        LockGuard g(*mu_);
        closed_ = true;
        not_empty_->notify_all();
        not_full_->notify_all();
    }

    bool closed() const {
        LockGuard g(*mu_);
        return closed_;
    }

    // Closed and empty: no item will ever be delivered again.
    bool drained() const {
        LockGuard g(*mu_);
        return closed_ && items_.empty();
    }

    bool empty() const {
        LockGuard g(*mu_);
        return items_.empty();
    }

    std::size_t size() const {
        LockGuard g(*mu_);
        return items_.size();
    }

    std::size_t capacity() const { return capacity_; }
    QueueRole role() const { return role_; }
    const std::string& name() const { return name_; }

private:
    const std::size_t capacity_;
    const QueueRole role_;
    const std::string name_;
    mutable std::unique_ptr<Mutex> mu_;
    std::unique_ptr<Cond> not_empty_;
    std::unique_ptr<Cond> not_full_;
    std::deque<T> items_;
    bool closed_ = false;
};

} // namespace loadflow
