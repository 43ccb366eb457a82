#include "loadflow/sample.hpp"

#include <stdexcept>

namespace loadflow {

std::vector<std::pair<std::size_t, std::size_t>> TransformChain::sections() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < transforms_.size(); ++i) {
        if (!transforms_[i].barrier) continue;
        if (i > start) out.emplace_back(start, i);
        out.emplace_back(i, i + 1); // the barrier itself, pinned
        start = i + 1;
    }
    if (start < transforms_.size()) out.emplace_back(start, transforms_.size());
    return out;
}

double TransformChain::size_factor_product() const {
    double p = 1.0;
    for (const auto& t : transforms_) p *= t.size_factor;
    return p;
}

void apply_transform(Sample& sample, std::size_t index, Runtime& rt, Rng& rng) {
    if (sample.chain == nullptr) throw std::invalid_argument("sample has no chain");
    const auto& chain = *sample.chain;
    if (index >= chain.size() || index != sample.next_index) {
        throw std::invalid_argument("apply_transform: index " + std::to_string(index) +
                                    " out of range or != next_index " +
                                    std::to_string(sample.next_index));
    }
    const Transform& t = chain.at(index);
    if (t.synthetic()) {
        rt.sleep(t.cost(sample, rng));
    } else if (t.apply) {
        sample.payload = t.apply(std::move(sample.payload));
    }
    sample.size_bytes *= t.size_factor;
    sample.next_index = index + 1;
}

void apply_all_transforms(Sample& sample, Runtime& rt, Rng& rng) {
    while (sample.chain != nullptr && sample.next_index < sample.chain->size()) {
        apply_transform(sample, sample.next_index, rt, rng);
    }
}

} // namespace loadflow
