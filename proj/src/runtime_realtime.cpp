#include "loadflow/runtime.hpp"

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace loadflow {
namespace {

class RealMutex final : public Mutex {
public:
    void lock() override { m_.lock(); }
    void unlock() override { m_.unlock(); }
    std::mutex& native() { return m_; }

private:
    std::mutex m_;
};

class RealCond final : public Cond {
public:
    void wait(Mutex& m) override {
        auto& rm = static_cast<RealMutex&>(m);
        std::unique_lock<std::mutex> lk(rm.native(), std::adopt_lock);
        cv_.wait(lk);
        lk.release();
    }
    void notify_one() override { cv_.notify_one(); }
    void notify_all() override { cv_.notify_all(); }

private:
    std::condition_variable cv_;
};

class RealtimeRuntime final : public Runtime {
public:
    RealtimeRuntime() : t0_(std::chrono::steady_clock::now()) {}

    ~RealtimeRuntime() override {
        for (auto& t : threads_) {
            if (t.joinable()) t.join();
        }
    }

    TimeMs now() override {
        auto d = std::chrono::steady_clock::now() - t0_;
        return std::chrono::duration_cast<std::chrono::milliseconds>(d).count();
    }

    void sleep(DurationMs d) override {
        if (d > 0) std::this_thread::sleep_for(std::chrono::milliseconds(d));
    }

    void spawn(std::string, std::function<void()> body) override {
        std::lock_guard<std::mutex> lk(mu_);
        ++live_;
        threads_.emplace_back([this, body = std::move(body)] {
            body();
            std::lock_guard<std::mutex> g(mu_);
            --live_;
            done_cv_.notify_all();
        });
    }

    void run() override {
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [&] { return live_ == 0; });
        // No spawner is alive once live_ == 0, so threads_ is stable now.
        auto threads = std::move(threads_);
        threads_.clear();
        lk.unlock();
        for (auto& t : threads) {
            if (t.joinable()) t.join();
        }
    }

    std::unique_ptr<Mutex> make_mutex() override { return std::make_unique<RealMutex>(); }
    std::unique_ptr<Cond> make_cond() override { return std::make_unique<RealCond>(); }
    bool is_virtual() const override { return false; }

private:
    std::chrono::steady_clock::time_point t0_;
    std::mutex mu_;
    std::condition_variable done_cv_;
    std::vector<std::thread> threads_;
    std::size_t live_ = 0;
};

} // namespace

std::unique_ptr<Runtime> make_realtime_runtime() {
    return std::make_unique<RealtimeRuntime>();
}

} // namespace loadflow
