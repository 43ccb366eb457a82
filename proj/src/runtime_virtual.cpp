#include "loadflow/runtime.hpp"

#include <cassert>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace loadflow {
namespace {

// Thrown through a blocked actor to unwind it when the engine shuts down on
// error. Never escapes the actor wrapper.
struct ActorCancelled {};

class VirtualRuntime;

struct Actor {
    std::uint64_t id = 0;
    std::string name;
    std::thread thread;
    // Per-actor handoff channel with the driver.
    std::mutex m;
    std::condition_variable cv;
    bool resume_token = false;
    bool finished = false;
    bool blocked_in_cond = false; // diagnostic only
};

struct RunnableEntry {
    TimeMs t;
    std::uint64_t seq;
    Actor* actor;
};

struct RunnableLater {
    bool operator()(const RunnableEntry& a, const RunnableEntry& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.seq > b.seq;
    }
};

thread_local Actor* tl_current_actor = nullptr;

class VirtualCond;

// Discrete-event engine with thread-backed actors. Exactly one actor executes
// at any moment; the driver resumes actors in (wake_time, schedule_seq) order,
// so a run is a deterministic function of the actors' code and spawn order.
// Actor code perceives ordinary blocking semantics: sleep() consumes virtual
// time, Cond::wait() suspends until notified.
class VirtualRuntime final : public Runtime {
public:
    VirtualRuntime() = default;

    ~VirtualRuntime() override {
        cancel_all();
        join_all();
    }

    TimeMs now() override {
        std::lock_guard<std::mutex> lk(mu_);
        return now_;
    }

    void sleep(DurationMs d) override {
        Actor* self = tl_current_actor;
        if (self == nullptr) throw std::logic_error("virtual sleep outside actor");
        {
            std::lock_guard<std::mutex> lk(mu_);
            schedule_locked(self, now_ + (d > 0 ? d : 0));
            yield_locked();
        }
        if (!wait_for_token(self)) throw ActorCancelled{};
    }

    void spawn(std::string name, std::function<void()> body) override {
        std::lock_guard<std::mutex> lk(mu_);
        auto actor = std::make_unique<Actor>();
        Actor* a = actor.get();
        a->id = next_id_++;
        a->name = std::move(name);
        ++live_;
        schedule_locked(a, now_);
        a->thread = std::thread([this, a, body = std::move(body)] {
            tl_current_actor = a;
            if (wait_for_token(a)) {
                try {
                    body();
                } catch (const ActorCancelled&) {
                } catch (const std::exception& e) {
                    record_error(a, e.what());
                } catch (...) {
                    record_error(a, "unknown exception");
                }
            }
            finish(a);
        });
        actors_.push_back(std::move(actor));
    }

    void run() override {
        std::unique_lock<std::mutex> lk(mu_);
        for (;;) {
            if (!runnable_.empty()) {
                RunnableEntry e = runnable_.top();
                runnable_.pop();
                if (e.t > now_) now_ = e.t;
                running_ = e.actor;
                actor_yielded_ = false;
                {
                    std::lock_guard<std::mutex> alk(e.actor->m);
                    e.actor->resume_token = true;
                }
                e.actor->cv.notify_one();
                driver_cv_.wait(lk, [&] { return actor_yielded_; });
                continue;
            }
            if (live_ == 0) break;
            // Live actors with nothing runnable: every one of them is parked
            // on a Cond and nobody can ever wake them.
            std::ostringstream msg;
            msg << "virtual deadlock: " << live_ << " actor(s) blocked:";
            for (const auto& a : actors_) {
                if (!a->finished) msg << " " << a->name;
            }
            lk.unlock();
            cancel_all();
            join_all();
            throw std::logic_error(msg.str());
        }
        lk.unlock();
        join_all();
        std::lock_guard<std::mutex> g(mu_);
        if (!first_error_.empty()) {
            throw std::runtime_error("actor failed: " + first_error_);
        }
    }

    std::unique_ptr<Mutex> make_mutex() override;
    std::unique_ptr<Cond> make_cond() override;
    bool is_virtual() const override { return true; }

private:
    friend class VirtualCond;

    void schedule_locked(Actor* a, TimeMs t) {
        runnable_.push(RunnableEntry{t, next_seq_++, a});
    }

    // Pre: mu_ held, caller is the running actor. Hands control back to the
    // driver; the caller must then block in wait_for_token outside mu_.
    void yield_locked() {
        running_ = nullptr;
        actor_yielded_ = true;
        driver_cv_.notify_one();
    }

    bool wait_for_token(Actor* a) {
        // Never hold a->m while taking mu_: the driver acquires them in the
        // opposite order.
        {
            std::unique_lock<std::mutex> lk(a->m);
            a->cv.wait(lk, [&] { return a->resume_token; });
            a->resume_token = false;
        }
        std::lock_guard<std::mutex> g(mu_);
        return !cancelled_;
    }

    void finish(Actor* a) {
        std::lock_guard<std::mutex> lk(mu_);
        a->finished = true;
        --live_;
        if (running_ == a) {
            running_ = nullptr;
            actor_yielded_ = true;
        }
        driver_cv_.notify_all();
    }

    void record_error(Actor* a, const std::string& what) {
        std::lock_guard<std::mutex> lk(mu_);
        if (first_error_.empty()) first_error_ = a->name + ": " + what;
    }

    void cancel_all() {
        std::lock_guard<std::mutex> lk(mu_);
        cancelled_ = true;
        for (const auto& a : actors_) {
            if (a->finished) continue;
            {
                std::lock_guard<std::mutex> alk(a->m);
                a->resume_token = true;
            }
            a->cv.notify_one();
        }
    }

    void join_all() {
        // Wait for every actor thread to reach finish(); then join.
        {
            std::unique_lock<std::mutex> lk(mu_);
            driver_cv_.wait(lk, [&] { return live_ == 0; });
        }
        for (const auto& a : actors_) {
            if (a->thread.joinable()) a->thread.join();
        }
    }

    std::mutex mu_;
    std::condition_variable driver_cv_;
    TimeMs now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_id_ = 0;
    std::priority_queue<RunnableEntry, std::vector<RunnableEntry>, RunnableLater> runnable_;
    Actor* running_ = nullptr;
    bool actor_yielded_ = false;
    bool cancelled_ = false;
    std::size_t live_ = 0;
    std::string first_error_;
    std::vector<std::unique_ptr<Actor>> actors_;
};

// Only one actor runs at a time, so mutual exclusion is structural.
class VirtualMutex final : public Mutex {
public:
    void lock() override {}
    void unlock() override {}
};

class VirtualCond final : public Cond {
public:
    explicit VirtualCond(VirtualRuntime& rt) : rt_(rt) {}

    void wait(Mutex&) override {
        Actor* self = tl_current_actor;
        if (self == nullptr) throw std::logic_error("virtual cond wait outside actor");
        {
            std::lock_guard<std::mutex> lk(rt_.mu_);
            waiters_.push_back(self);
            self->blocked_in_cond = true;
            rt_.yield_locked();
        }
        bool ok = rt_.wait_for_token(self);
        self->blocked_in_cond = false;
        if (!ok) throw ActorCancelled{};
    }

    void notify_one() override {
        std::lock_guard<std::mutex> lk(rt_.mu_);
        if (!waiters_.empty()) {
            rt_.schedule_locked(waiters_.front(), rt_.now_);
            waiters_.pop_front();
        }
    }

    void notify_all() override {
        std::lock_guard<std::mutex> lk(rt_.mu_);
        for (Actor* a : waiters_) rt_.schedule_locked(a, rt_.now_);
        waiters_.clear();
    }

private:
    VirtualRuntime& rt_;
    std::deque<Actor*> waiters_; // FIFO wake order keeps runs deterministic
};

std::unique_ptr<Mutex> VirtualRuntime::make_mutex() {
    return std::make_unique<VirtualMutex>();
}

std::unique_ptr<Cond> VirtualRuntime::make_cond() {
    return std::make_unique<VirtualCond>(*this);
}

} // namespace

std::unique_ptr<Runtime> make_virtual_runtime() {
    return std::make_unique<VirtualRuntime>();
}

} // namespace loadflow
