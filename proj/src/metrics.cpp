#include "loadflow/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "loadflow/profiler.hpp"

namespace loadflow {

using nlohmann::json;

LatencyDigest digest_latencies(std::vector<DurationMs> values) {
    LatencyDigest d;
    if (values.empty()) return d;
    d.mean = static_cast<double>(std::accumulate(values.begin(), values.end(), DurationMs{0})) /
             static_cast<double>(values.size());
    d.max = *std::max_element(values.begin(), values.end());
    d.p50 = percentile(values, 50);
    d.p75 = percentile(values, 75);
    d.p90 = percentile(values, 90);
    d.p99 = percentile(values, 99);
    return d;
}

std::vector<std::pair<TimeMs, double>> throughput_series_from_events(
    const std::vector<BatchEvent>& events, TimeMs span, DurationMs bin) {
    std::vector<std::pair<TimeMs, double>> series;
    if (span <= 0 || bin <= 0) return series;
    const auto n_bins = static_cast<std::size_t>((span + bin - 1) / bin);
    std::vector<double> bytes(n_bins, 0.0);
    for (const auto& e : events) {
        auto idx = static_cast<std::size_t>(e.compute_end > 0 ? (e.compute_end - 1) / bin : 0);
        if (idx >= n_bins) idx = n_bins - 1;
        bytes[idx] += e.bytes;
    }
    series.reserve(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double mb_per_s = bytes[i] / 1e6 / (static_cast<double>(bin) / 1000.0);
        series.emplace_back(static_cast<TimeMs>(i + 1) * bin, mb_per_s);
    }
    return series;
}

namespace {

json consumer_to_json(const ConsumerReport& c) {
    return json{{"span_ms", c.span_ms},     {"busy_ms", c.busy_ms},
                {"idle_ms", c.idle_ms},     {"busy_fraction", c.busy_fraction},
                {"batches", c.batches},     {"samples", c.samples},
                {"mb_consumed", c.mb_consumed}};
}

ConsumerReport consumer_from_json(const json& j) {
    ConsumerReport c;
    c.span_ms = j.at("span_ms");
    c.busy_ms = j.at("busy_ms");
    c.idle_ms = j.at("idle_ms");
    c.busy_fraction = j.at("busy_fraction");
    c.batches = j.at("batches");
    c.samples = j.at("samples");
    c.mb_consumed = j.at("mb_consumed");
    return c;
}

} // namespace

std::string MetricsReport::to_json_string() const {
    json j;
    j["experiment"] = {{"workload", workload}, {"loader", loader}, {"mode", mode},
                       {"seed", seed},         {"n_samples", n_samples},
                       {"batch_size", batch_size}, {"n_consumers", n_consumers}};
    j["completion_ms"] = completion_ms;
    j["consumers"] = json::array();
    for (const auto& c : consumers) j["consumers"].push_back(consumer_to_json(c));
    j["total_mb"] = total_mb;
    j["avg_throughput_mbps"] = avg_throughput_mbps;
    j["batch_latency"] = {{"p50", batch_latency.p50}, {"p75", batch_latency.p75},
                          {"p90", batch_latency.p90}, {"p99", batch_latency.p99},
                          {"max", batch_latency.max}, {"mean", batch_latency.mean}};
    j["classification"] = {{"slow_rate", slow_rate},
                           {"slow_count", slow_count},
                           {"fast_count", fast_count}};
    j["scheduler"] = {{"final_workers", final_workers},
                      {"ticks", scheduler_trace.size()}};
    j["audit"] = {{"generated", generated},
                  {"consumed", consumed},
                  {"duplicate_ids", duplicate_ids},
                  {"exactly_once", exactly_once},
                  {"short_batches", short_batches}};
    j["throughput_series"] = json::array();
    for (const auto& [t, v] : throughput_series) j["throughput_series"].push_back({t, v});
    j["partial"] = partial;
    return j.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json_string(const std::string& text) {
    json j = json::parse(text);
    MetricsReport r;
    const auto& e = j.at("experiment");
    r.workload = e.at("workload");
    r.loader = e.at("loader");
    r.mode = e.at("mode");
    r.seed = e.at("seed");
    r.n_samples = e.at("n_samples");
    r.batch_size = e.at("batch_size");
    r.n_consumers = e.at("n_consumers");
    r.completion_ms = j.at("completion_ms");
    for (const auto& c : j.at("consumers")) r.consumers.push_back(consumer_from_json(c));
    r.total_mb = j.at("total_mb");
    r.avg_throughput_mbps = j.at("avg_throughput_mbps");
    const auto& lat = j.at("batch_latency");
    r.batch_latency = {lat.at("p50"), lat.at("p75"), lat.at("p90"),
                       lat.at("p99"), lat.at("max"), lat.at("mean")};
    const auto& cls = j.at("classification");
    r.slow_rate = cls.at("slow_rate");
    r.slow_count = cls.at("slow_count");
    r.fast_count = cls.at("fast_count");
    r.final_workers = j.at("scheduler").at("final_workers");
    const auto& a = j.at("audit");
    r.generated = a.at("generated");
    r.consumed = a.at("consumed");
    r.duplicate_ids = a.at("duplicate_ids");
    r.exactly_once = a.at("exactly_once");
    r.short_batches = a.at("short_batches");
    for (const auto& row : j.at("throughput_series")) {
        r.throughput_series.emplace_back(row.at(0), row.at(1));
    }
    r.partial = j.at("partial");
    return r;
}

void MetricsReport::write_throughput_csv(std::ostream& out) const {
    out << "t_ms,mb_per_s\n";
    for (const auto& [t, v] : throughput_series) out << t << "," << v << "\n";
}

void MetricsReport::write_scheduler_trace_csv(std::ostream& out) const {
    out << "time_ms,workers,q_avg,c_usage,delta\n";
    for (const auto& row : scheduler_trace) {
        out << row.t << "," << row.workers << "," << row.q_avg << "," << row.c_usage
            << "," << row.delta << "\n";
    }
}

void MetricsReport::write_queue_occupancy_csv(std::ostream& out) const {
    out << "t_ms,batch_queue_len\n";
    for (const auto& [t, v] : queue_occupancy) out << t << "," << v << "\n";
}

} // namespace loadflow
