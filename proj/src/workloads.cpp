#include "loadflow/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace loadflow {

namespace {

constexpr double kZ90 = 1.2815515655446004; // standard normal 90th percentile

Transform synthetic_step(std::string name, double size_factor, std::size_t slot) {
    Transform t;
    t.name = std::move(name);
    t.size_factor = size_factor;
    t.cost = [slot](const Sample& s, Rng&) { return s.step_costs.at(slot); };
    return t;
}

std::shared_ptr<TransformChain> make_chain(
    const std::vector<std::pair<std::string, double>>& steps) {
    std::vector<Transform> ts;
    ts.reserve(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        ts.push_back(synthetic_step(steps[i].first, steps[i].second, i));
    }
    return std::make_shared<TransformChain>(std::move(ts));
}

// Splits an integer total across fixed shares exactly: floors everywhere,
// remainder to the largest share.
std::vector<DurationMs> split_total(DurationMs total, const std::vector<double>& shares) {
    std::vector<DurationMs> out(shares.size());
    DurationMs assigned = 0;
    std::size_t heaviest = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        out[i] = static_cast<DurationMs>(std::floor(static_cast<double>(total) * shares[i]));
        assigned += out[i];
        if (shares[i] > shares[heaviest]) heaviest = i;
    }
    out[heaviest] += total - assigned;
    return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace

const char* workload_name(WorkloadKind k) {
    switch (k) {
        case WorkloadKind::img_seg: return "img_seg";
        case WorkloadKind::obj_det: return "obj_det";
        case WorkloadKind::speech_3s: return "speech_3s";
        case WorkloadKind::speech_10s: return "speech_10s";
    }
    return "?";
}

WorkloadKind workload_from_name(const std::string& name) {
    if (name == "img_seg") return WorkloadKind::img_seg;
    if (name == "obj_det") return WorkloadKind::obj_det;
    if (name == "speech_3s") return WorkloadKind::speech_3s;
    if (name == "speech_10s") return WorkloadKind::speech_10s;
    throw std::invalid_argument("unknown workload: " + name);
}

void WorkloadSpec::validate() const {
    const auto& t = target;
    if (!(t.min <= t.med && t.med <= t.p75 && t.p75 <= t.p90 && t.p90 <= t.max)) {
        throw std::invalid_argument(
            "workload target_stats inconsistent: need min <= med <= p75 <= p90 <= max");
    }
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
}

WorkloadSpec default_spec(WorkloadKind kind, std::int64_t n_samples, std::uint64_t seed) {
    WorkloadSpec spec;
    spec.kind = kind;
    spec.n_samples = n_samples;
    spec.seed = seed;
    switch (kind) {
        case WorkloadKind::obj_det:
            spec.target = TargetStats{31, 28, 30, 35, 11, 176};
            break;
        case WorkloadKind::img_seg:
            spec.target = TargetStats{500, 470, 630, 750, 10, 2230};
            break;
        case WorkloadKind::speech_3s:
            spec.target = TargetStats{998, 508, 509, 3008, 502, 3017};
            break;
        case WorkloadKind::speech_10s:
            spec.target = TargetStats{2351, 508, 509, 10008, 502, 10014};
            break;
    }
    return spec;
}

Stream gen_speech(bool ten_seconds, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    Stream stream;
    stream.chain = make_chain({
        {"Pad", 1.12},          // inflationary: AutoOrder moves it to section end
        {"SpecAugment", 1.0},
        {"FilterBank", 1.0},
        {"FrameSplicing", 0.9},
        {"PermuteAudio", 1.0},
        {"LightStep", 1.0},
        {"HeavyStep", 1.0},
    });
    const DurationMs heavy = ten_seconds ? 9500 : 2500;

    Rng rng(seed);
    std::uniform_int_distribution<std::int64_t> in_bytes(60'000, 340'000);
    std::uniform_int_distribution<std::int64_t> out_bytes(400'000, 9'000'000);

    stream.samples.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        Sample s;
        s.id = static_cast<std::uint64_t>(i);
        s.bytes_in = static_cast<double>(in_bytes(rng));
        s.size_bytes = s.bytes_in;
        s.bytes_out = static_cast<double>(out_bytes(rng));
        s.chain = stream.chain.get();
        const bool is_heavy = (i + 1) % 5 == 0;
        s.step_costs = {2, 2, 2, 1, 1, 500, is_heavy ? heavy : 0};
        stream.samples.push_back(std::move(s));
    }
    return stream;
}

Stream gen_empirical(const WorkloadSpec& spec) {
    spec.validate();
    const TargetStats& t = spec.target;
    const double mu = std::log(t.med);
    const double sigma = std::log(t.p90 / t.med) / kZ90;

    Stream stream;
    std::vector<double> shares;
    if (spec.kind == WorkloadKind::img_seg) {
        stream.chain = make_chain({
            {"RandomCrop", 0.0735}, // deflationary and first: already optimally ordered
            {"RandomFlip", 1.0},
            {"RandomBrightness", 1.0},
            {"GaussianNoise", 1.0},
            {"Cast", 1.0},
        });
        shares = {0.68, 0.08, 0.08, 0.08, 0.08};
    } else if (spec.kind == WorkloadKind::obj_det) {
        stream.chain = make_chain({
            {"Resize", 1.2},
            {"RandomHorizontalFlip", 1.0},
            {"ToTensor", 8.0},
            {"Normalize", 1.0},
        });
        shares = {0.40, 0.10, 0.40, 0.10};
    } else {
        throw std::invalid_argument("gen_empirical handles img_seg and obj_det only");
    }

    Rng rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> objdet_in(100'000, 1'000'000);
    std::uniform_int_distribution<std::int64_t> objdet_out(4'000'000, 12'000'000);

    stream.samples.reserve(static_cast<std::size_t>(spec.n_samples));
    for (std::int64_t i = 0; i < spec.n_samples; ++i) {
        const double z = normal(rng);
        double total_d = std::exp(mu + sigma * z);
        total_d = std::clamp(total_d, t.min, t.max);
        const auto total = static_cast<DurationMs>(std::llround(total_d));

        Sample s;
        s.id = static_cast<std::uint64_t>(i);
        s.chain = stream.chain.get();
        s.step_costs = split_total(total, shares);

        if (spec.kind == WorkloadKind::img_seg) {
            // Cost-correlated input size in [30, 375] MB with mild noise.
            const double q = normal_cdf((std::log(total_d) - mu) / sigma);
            const double pos = 0.85 * q + 0.15 * unit(rng);
            const double mb = 30.0 + 345.0 * std::clamp(pos, 0.0, 1.0);
            s.bytes_in = std::floor(mb * 1e6);
            s.bytes_out = 10e6; // standardized output
        } else {
            // Size independent of cost: the size heuristic has nothing to learn.
            s.bytes_in = static_cast<double>(objdet_in(rng));
            s.bytes_out = static_cast<double>(objdet_out(rng));
        }
        s.size_bytes = s.bytes_in;
        stream.samples.push_back(std::move(s));
    }
    return stream;
}

Stream generate(const WorkloadSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case WorkloadKind::speech_3s:
            return gen_speech(false, spec.n_samples, spec.seed);
        case WorkloadKind::speech_10s:
            return gen_speech(true, spec.n_samples, spec.seed);
        case WorkloadKind::img_seg:
        case WorkloadKind::obj_det:
            return gen_empirical(spec);
    }
    throw std::logic_error("unreachable");
}

void export_stream_csv(const Stream& stream, std::ostream& out) {
    const std::size_t k = stream.chain->size();
    out << "id,size_in,size_out";
    for (std::size_t i = 0; i < k; ++i) out << ",cost_" << i;
    out << "\n";
    for (const auto& s : stream.samples) {
        out << s.id << "," << static_cast<std::int64_t>(s.bytes_in) << ","
            << static_cast<std::int64_t>(s.bytes_out);
        for (std::size_t i = 0; i < k; ++i) {
            out << "," << (i < s.step_costs.size() ? s.step_costs[i] : 0);
        }
        out << "\n";
    }
}

} // namespace loadflow
