#include "loadflow/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "loadflow/balancer.hpp"

namespace loadflow {

DurationMs percentile(std::vector<DurationMs> durations, double p) {
    if (durations.empty()) throw InsufficientProfileData();
    if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile p out of (0,100]");
    std::sort(durations.begin(), durations.end());
    auto n = static_cast<double>(durations.size());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    if (rank == 0) rank = 1;
    return durations[rank - 1];
}

SampleStats SampleStats::from_costs(std::uint64_t id, double size_bytes,
                                    std::vector<DurationMs> costs, bool slow) {
    SampleStats st;
    st.sample_id = id;
    st.size_bytes = size_bytes;
    st.total = std::accumulate(costs.begin(), costs.end(), DurationMs{0});
    st.transform_count = static_cast<int>(costs.size());
    st.per_transform = std::move(costs);
    st.slow = slow;
    return st;
}

Profiler::Profiler(Runtime& rt, ProfilerConfig cfg)
    : cfg_(cfg), mu_(rt.make_mutex()) {
    if (cfg_.window == 0) throw std::invalid_argument("profiler window must be > 0");
}

void Profiler::record(SampleStats stats) {
    LockGuard g(*mu_);
    window_.push_back(std::move(stats));
    if (window_.size() > cfg_.window) window_.pop_front();
    ++recorded_total_;
}

DurationMs Profiler::update_timeout(TimeoutPolicy& policy) {
    LockGuard g(*mu_);
    if (window_.empty()) throw InsufficientProfileData();

    std::size_t slow_count = 0;
    std::vector<DurationMs> totals;
    totals.reserve(window_.size());
    for (const auto& st : window_) {
        totals.push_back(st.total);
        if (st.slow) ++slow_count;
    }
    const double rate = static_cast<double>(slow_count) / static_cast<double>(window_.size());

    if (current_pct_ == 75 && rate > cfg_.escalate_threshold) {
        current_pct_ = 90;
    } else if (current_pct_ == 90 && window_.size() == cfg_.window &&
               rate < cfg_.deescalate_threshold) {
        // De-escalate only on a full window: hysteresis against flapping.
        current_pct_ = 75;
    }

    DurationMs t = percentile(std::move(totals), current_pct_);
    policy.set(t, current_pct_ == 75 ? TimeoutPolicy::Source::p75
                                     : TimeoutPolicy::Source::p90);
    return t;
}

int Profiler::current_percentile() const {
    LockGuard g(*mu_);
    return current_pct_;
}

double Profiler::slow_rate() const {
    LockGuard g(*mu_);
    if (window_.empty()) return 0.0;
    std::size_t slow_count = 0;
    for (const auto& st : window_) {
        if (st.slow) ++slow_count;
    }
    return static_cast<double>(slow_count) / static_cast<double>(window_.size());
}

std::size_t Profiler::recorded_total() const {
    LockGuard g(*mu_);
    return recorded_total_;
}

std::size_t Profiler::window_size() const {
    LockGuard g(*mu_);
    return window_.size();
}

void Profiler::dump_csv(std::ostream& out) const {
    LockGuard g(*mu_);
    out << "sample_id,size_bytes,total_ms,n_transforms\n";
    for (const auto& st : window_) {
        out << st.sample_id << "," << static_cast<std::int64_t>(st.size_bytes) << ","
            << st.total << "," << st.transform_count << "\n";
    }
}

void profiler_loop(Profiler& prof, TimeoutPolicy& policy, Runtime& rt,
                   const std::function<bool()>& stop) {
    const auto& cfg = prof.config();
    const DurationMs chunk = std::max<DurationMs>(1, cfg.update_interval);
    TimeMs t0 = rt.now();
    while (rt.now() - t0 < cfg.warmup) {
        if (stop()) return;
        rt.sleep(std::min(chunk, cfg.warmup - (rt.now() - t0)));
    }
    while (!stop()) {
        if (prof.window_size() > 0) prof.update_timeout(policy);
        rt.sleep(chunk);
    }
}

} // namespace loadflow
