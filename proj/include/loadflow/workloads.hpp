#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "loadflow/sample.hpp"

namespace loadflow {

enum class WorkloadKind : std::uint8_t { img_seg, obj_det, speech_3s, speech_10s };

const char* workload_name(WorkloadKind k);
WorkloadKind workload_from_name(const std::string& name);

// Calibration targets, in ms.
struct TargetStats {
    double avg = 0;
    double med = 0;
    double p75 = 0;
    double p90 = 0;
    double min = 0;
    double max = 0;
};

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::speech_3s;
    std::int64_t n_samples = 1000;
    std::uint64_t seed = 1;
    TargetStats target; // defaults filled per kind
    DurationMs load_latency = 0; // optional per-sample load cost at the feeder

    void validate() const; // min <= med <= p75 <= p90 <= max
};

WorkloadSpec default_spec(WorkloadKind kind, std::int64_t n_samples, std::uint64_t seed);

// A materialized sample stream. The chain is shared: samples reference it by
// pointer and stay valid as long as the Stream (or a copy of the chain
// pointer) lives.
struct Stream {
    std::shared_ptr<TransformChain> chain;
    std::vector<Sample> samples;
};

// Deterministic speech microbenchmark: every sample runs five negligible base
// steps plus a 500 ms light step; every fifth sample (indices 4, 9, ...)
// additionally pays the heavy step, for per-sample totals of 508 ms and
// 3008/10008 ms.
Stream gen_speech(bool ten_seconds, std::int64_t n, std::uint64_t seed);

// Long-tailed empirical workloads: per-sample totals drawn from a log-normal
// fitted to (median, p90) and clamped to [min, max]; totals split across the
// chain by fixed per-transform shares. img_seg sizes are cost-correlated;
// obj_det sizes are independent of cost.
Stream gen_empirical(const WorkloadSpec& spec);

Stream generate(const WorkloadSpec& spec);

// Flat CSV: id, size_in, size_out, cost_0..cost_{k-1}.
void export_stream_csv(const Stream& stream, std::ostream& out);

} // namespace loadflow
