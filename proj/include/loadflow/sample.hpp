#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "loadflow/runtime.hpp"
#include "loadflow/time.hpp"

namespace loadflow {

class TransformChain;
struct Sample;

enum class SampleClass : std::uint8_t { unclassified, fast, slow };

// Real-function mode carries actual data through the chain; synthetic mode
// leaves it empty and moves only metadata (sizes and costs).
using Payload = std::vector<double>;

using Rng = std::mt19937_64;

// One preprocessing step. Exactly one of `cost` (synthetic mode: how long the
// step takes for a given sample) or `apply` (real-function mode: the actual
// payload operation) is set.
struct Transform {
    std::string name;
    double size_factor = 1.0; // <1 deflationary, >1 inflationary
    bool barrier = false;     // reordering may not cross this step
    std::function<DurationMs(const Sample&, Rng&)> cost;
    std::function<Payload(Payload)> apply;

    bool synthetic() const { return static_cast<bool>(cost); }
};

struct Sample {
    std::uint64_t id = 0;
    double bytes_in = 0;   // payload size before preprocessing
    double size_bytes = 0; // current recorded payload size (starts at bytes_in)
    double bytes_out = 0;  // post-preprocessing size, metadata for throughput
    const TransformChain* chain = nullptr;
    std::size_t next_index = 0; // next transform to apply; == n means done
    SampleClass classification = SampleClass::unclassified;
    TimeMs t_enqueue = -1;
    TimeMs t_ready = -1;
    // Synthetic per-step durations, indexed by each transform's identity in
    // the chain template (transform cost functions capture their own slot, so
    // reordering moves costs with the transform).
    std::vector<DurationMs> step_costs;
    Payload payload; // real-function mode only
};

class TransformChain {
public:
    TransformChain() = default;
    explicit TransformChain(std::vector<Transform> transforms)
        : transforms_(std::move(transforms)) {}

    const std::vector<Transform>& transforms() const { return transforms_; }
    std::vector<Transform>& transforms() { return transforms_; }
    std::size_t size() const { return transforms_.size(); }
    bool empty() const { return transforms_.empty(); }
    const Transform& at(std::size_t i) const { return transforms_.at(i); }

    // Half-open [first, last) runs of reorderable transforms. Barrier
    // transforms form their own single-element sections and never move.
    std::vector<std::pair<std::size_t, std::size_t>> sections() const;

    double size_factor_product() const;

private:
    std::vector<Transform> transforms_;
};

struct Batch {
    std::vector<Sample> samples;
    TimeMs sealed_at = -1;

    double bytes_out() const {
        double b = 0;
        for (const auto& s : samples) b += s.bytes_out;
        return b;
    }
};

// Applies chain transform `index` to the sample: consumes the step's cost
// from the clock (synthetic mode), scales the recorded payload size by the
// step's size factor, and advances next_index. Throws std::invalid_argument
// if index != sample.next_index or the chain is exhausted.
void apply_transform(Sample& sample, std::size_t index, Runtime& rt, Rng& rng);

// Runs the whole remaining chain with no timeout. Used by resume workers and
// as the sequential reference path in tests.
void apply_all_transforms(Sample& sample, Runtime& rt, Rng& rng);

} // namespace loadflow
