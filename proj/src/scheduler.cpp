#include "loadflow/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace loadflow {

namespace {

int round_half_away(double x) {
    return static_cast<int>(x >= 0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

} // namespace

int compute_delta(const SchedulerObservation& obs, const SchedulerConfig& cfg) {
    const double raw = cfg.alpha * (1.0 - obs.q_size_avg / cfg.q_max) +
                       cfg.beta * (obs.c_usage - cfg.theta_c);
    return std::clamp(round_half_away(raw), -cfg.delta_clip, cfg.delta_clip);
}

int update_workers(int current, int delta, const SchedulerConfig& cfg) {
    return std::min(cfg.max_workers, std::max(1, current + delta));
}

void scheduler_loop(WorkerPool& pool, std::span<BatchQueue* const> batch_queues,
                    const SchedulerConfig& cfg, Runtime& rt,
                    std::vector<SchedulerTraceRow>* trace) {
    double q_avg = 0.0;
    DurationMs prev_busy = pool.effective_busy();
    int prev_active = pool.target_active();

    while (!pool.stopped()) {
        rt.sleep(cfg.tick);
        if (pool.stopped()) break;

        double q_now = 0.0;
        for (auto* q : batch_queues) q_now += static_cast<double>(q->size());
        if (!batch_queues.empty()) q_now /= static_cast<double>(batch_queues.size());
        q_avg = cfg.ema_alpha * q_now + (1.0 - cfg.ema_alpha) * q_avg;

        const DurationMs busy = pool.effective_busy();
        const double window = static_cast<double>(cfg.tick) * std::max(1, prev_active);
        const double c_usage = std::clamp(
            static_cast<double>(std::max<DurationMs>(0, busy - prev_busy)) / window, 0.0, 1.0);

        const SchedulerObservation obs{std::clamp(q_avg, 0.0, cfg.q_max), c_usage};
        const int delta = compute_delta(obs, cfg);
        const int workers = update_workers(pool.target_active(), delta, cfg);
        pool.resize(workers);

        if (trace != nullptr) {
            trace->push_back(SchedulerTraceRow{rt.now(), workers, obs.q_size_avg, c_usage, delta});
        }
        prev_busy = busy;
        prev_active = workers;
    }
}

} // namespace loadflow
