#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "loadflow/scheduler.hpp"
#include "loadflow/time.hpp"
#include "loadflow/trainer.hpp"

namespace loadflow {

struct ConsumerReport {
    TimeMs span_ms = 0;
    DurationMs busy_ms = 0;
    DurationMs idle_ms = 0;
    double busy_fraction = 0;
    std::int64_t batches = 0;
    std::int64_t samples = 0;
    double mb_consumed = 0;
};

struct LatencyDigest {
    DurationMs p50 = 0, p75 = 0, p90 = 0, p99 = 0, max = 0;
    double mean = 0;
};

struct MetricsReport {
    // experiment identity
    std::string workload;
    std::string loader;
    std::string mode;
    std::uint64_t seed = 0;
    std::int64_t n_samples = 0;
    int batch_size = 0;
    int n_consumers = 0;

    TimeMs completion_ms = 0;
    std::vector<ConsumerReport> consumers;
    double total_mb = 0;
    double avg_throughput_mbps = 0;
    std::vector<std::pair<TimeMs, double>> throughput_series; // (bin end, MB/s)
    LatencyDigest batch_latency;

    double slow_rate = 0;
    std::int64_t slow_count = 0;
    std::int64_t fast_count = 0;

    std::vector<SchedulerTraceRow> scheduler_trace;
    int final_workers = 0;
    std::vector<std::pair<TimeMs, std::size_t>> queue_occupancy;

    // exactly-once audit
    std::int64_t generated = 0;
    std::int64_t consumed = 0;
    std::int64_t duplicate_ids = 0;
    bool exactly_once = false;
    std::int64_t short_batches = 0; // batches below batch_size

    bool partial = false; // realtime abort marker

    std::string to_json_string() const;
    static MetricsReport from_json_string(const std::string& text);

    void write_throughput_csv(std::ostream&) const;
    void write_scheduler_trace_csv(std::ostream&) const;
    void write_queue_occupancy_csv(std::ostream&) const;
};

LatencyDigest digest_latencies(std::vector<DurationMs> values);

// 100 ms-binned MB/s series from per-batch consumption events.
std::vector<std::pair<TimeMs, double>> throughput_series_from_events(
    const std::vector<BatchEvent>& events, TimeMs span, DurationMs bin = 100);

} // namespace loadflow
