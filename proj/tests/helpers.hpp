#pragma once

// Shared builders and oracles for the test suites. Oracles here are
// deliberately independent of the library's execution path: plain arithmetic
// on cost lists, sort-based percentiles, and sequential chain application.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "loadflow/sample.hpp"
#include "loadflow/time.hpp"

namespace lftest {

using loadflow::DurationMs;
using loadflow::Sample;
using loadflow::Transform;
using loadflow::TransformChain;

// Chain whose step i costs `costs[i]` for every sample, with optional size
// factors (default 1.0).
inline std::shared_ptr<TransformChain> fixed_cost_chain(
    const std::vector<DurationMs>& costs, const std::vector<double>& factors = {}) {
    std::vector<Transform> ts;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        Transform t;
        t.name = "t" + std::to_string(i);
        t.size_factor = i < factors.size() ? factors[i] : 1.0;
        DurationMs c = costs[i];
        t.cost = [c](const Sample&, loadflow::Rng&) { return c; };
        ts.push_back(std::move(t));
    }
    return std::make_shared<TransformChain>(std::move(ts));
}

inline Sample make_sample(std::uint64_t id, double size_bytes,
                          const TransformChain* chain) {
    Sample s;
    s.id = id;
    s.bytes_in = size_bytes;
    s.size_bytes = size_bytes;
    s.bytes_out = size_bytes;
    s.chain = chain;
    return s;
}

// Sort-based nearest-rank percentile oracle.
inline DurationMs percentile_oracle(std::vector<DurationMs> v, double p) {
    std::sort(v.begin(), v.end());
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(p / 100.0 * static_cast<double>(v.size())));
    if (rank == 0) rank = 1;
    return v[rank - 1];
}

// Spearman rank correlation (average ranks for ties).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return v[a] < v[b];
        });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < idx.size()) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    auto rx = ranks(x);
    auto ry = ranks(y);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

} // namespace lftest
