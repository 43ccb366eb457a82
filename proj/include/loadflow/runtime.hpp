#pragma once

#include <functional>
#include <memory>
#include <string>

#include "loadflow/time.hpp"

namespace loadflow {

// Mutex/Cond mirror std::mutex/std::condition_variable so pipeline code can
// be written once in ordinary blocking style. The realtime runtime backs them
// with the real primitives; the virtual runtime backs them with engine
// suspension (its mutex is a no-op because only one actor runs at a time).
class Mutex {
public:
    virtual ~Mutex() = default;
    virtual void lock() = 0;
    virtual void unlock() = 0;
};

class Cond {
public:
    virtual ~Cond() = default;
    // Pre: m is held by the caller. Atomically releases m and suspends;
    // reacquires m before returning. May wake spuriously: always use in a
    // predicate loop.
    virtual void wait(Mutex& m) = 0;
    virtual void notify_one() = 0;
    virtual void notify_all() = 0;
};

class LockGuard {
public:
    explicit LockGuard(Mutex& m) : m_(m) { m_.lock(); }
    ~LockGuard() { m_.unlock(); }
    LockGuard(const LockGuard&) = delete;
    LockGuard& operator=(const LockGuard&) = delete;

private:
    Mutex& m_;
};

// Execution context: the only source of time and concurrency for the whole
// pipeline. Every loop (worker, batcher, consumer, scheduler) is spawned as
// an actor and may only block through sleep() or Cond::wait().
class Runtime {
public:
    virtual ~Runtime() = default;

    virtual TimeMs now() = 0;

    // Suspends the calling actor for d milliseconds (virtual: advances the
    // event engine; realtime: sleeps). d <= 0 yields.
    virtual void sleep(DurationMs d) = 0;

    // Starts a new actor. May be called before run() or from a running actor.
    virtual void spawn(std::string name, std::function<void()> body) = 0;

    // Drives the actors to completion. Realtime: waits for every spawned
    // thread to finish. Virtual: runs the event loop until all actors exit;
    // throws if actors remain blocked with nothing runnable.
    virtual void run() = 0;

    virtual std::unique_ptr<Mutex> make_mutex() = 0;
    virtual std::unique_ptr<Cond> make_cond() = 0;

    virtual bool is_virtual() const = 0;
};

std::unique_ptr<Runtime> make_realtime_runtime();
std::unique_ptr<Runtime> make_virtual_runtime();

} // namespace loadflow
