#include "loadflow/balancer.hpp"

#include <stdexcept>

namespace loadflow {

namespace {

RouteResult process_synthetic(Sample s, DurationMs t_out, SampleQueue& fast_q,
                              TempQueue& temp_q, Runtime& rt, Rng& rng) {
    const TransformChain& chain = *s.chain;
    RouteResult res;
    DurationMs elapsed = 0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        DurationMs c = chain.at(i).cost(s, rng);
        if (c < 0) throw std::logic_error("negative transform cost");
        if (elapsed + c > t_out) {
            // Budget expires mid-transform: charge the worker exactly t_out,
            // discard the partial effect, park (sample, i) for resume.
            rt.sleep(t_out - elapsed);
            s.classification = SampleClass::slow;
            res.route = Route::temp;
            res.foreground_ms = t_out;
            res.timeout_index = i;
            temp_q.put(TempItem{std::move(s), i, res.exec_costs});
            return res;
        }
        rt.sleep(c);
        s.size_bytes *= chain.at(i).size_factor;
        s.next_index = i + 1;
        elapsed += c;
        res.exec_costs.push_back(c);
    }
    s.classification = SampleClass::fast;
    s.t_ready = rt.now();
    res.route = Route::fast;
    res.foreground_ms = elapsed;
    fast_q.put(std::move(s));
    return res;
}

RouteResult process_real(Sample s, DurationMs t_out, SampleQueue& fast_q,
                         TempQueue& temp_q, Runtime& rt, Rng& rng) {
    (void)rng;
    const TransformChain& chain = *s.chain;
    RouteResult res;
    const TimeMs start = rt.now();
    for (std::size_t i = 0; i < chain.size(); ++i) {
        Payload saved_payload = s.payload;
        const double saved_size = s.size_bytes;
        const TimeMs step_start = rt.now();
        s.payload = chain.at(i).apply ? chain.at(i).apply(std::move(s.payload))
                                      : std::move(s.payload);
        const DurationMs step_ms = rt.now() - step_start;
        if (rt.now() - start > t_out) {
            // Cooperative check: the transform that was running when the
            // budget expired is rolled back and re-executed in background.
            s.payload = std::move(saved_payload);
            s.size_bytes = saved_size;
            s.classification = SampleClass::slow;
            res.route = Route::temp;
            res.foreground_ms = rt.now() - start;
            res.timeout_index = i;
            temp_q.put(TempItem{std::move(s), i, res.exec_costs});
            return res;
        }
        s.size_bytes *= chain.at(i).size_factor;
        s.next_index = i + 1;
        res.exec_costs.push_back(step_ms);
    }
    s.classification = SampleClass::fast;
    s.t_ready = rt.now();
    res.route = Route::fast;
    res.foreground_ms = rt.now() - start;
    fast_q.put(std::move(s));
    return res;
}

} // namespace

RouteResult process_sample(Sample sample, DurationMs t_out, SampleQueue& fast_q,
                           TempQueue& temp_q, Runtime& rt, Rng& rng) {
    if (sample.chain == nullptr || sample.chain->empty()) {
        throw std::invalid_argument("process_sample: sample has no chain");
    }
    if (sample.next_index != 0 || sample.classification != SampleClass::unclassified) {
        throw std::invalid_argument("process_sample: sample already started");
    }
    if (t_out <= 0) throw std::invalid_argument("process_sample: t_out must be > 0");
    if (sample.chain->at(0).synthetic()) {
        return process_synthetic(std::move(sample), t_out, fast_q, temp_q, rt, rng);
    }
    return process_real(std::move(sample), t_out, fast_q, temp_q, rt, rng);
}

void resume_slow(TempQueue& temp_q, SampleQueue& slow_q, Runtime& rt, Rng& rng,
                 const ResumeHook& on_complete) {
    while (auto item = temp_q.get()) {
        Sample s = std::move(item->sample);
        const TransformChain& chain = *s.chain;
        std::vector<DurationMs> costs = std::move(item->fg_costs);
        const TimeMs bg_start = rt.now();
        for (std::size_t i = item->resume_index; i < chain.size(); ++i) {
            const TimeMs step_start = rt.now();
            apply_transform(s, i, rt, rng);
            costs.push_back(rt.now() - step_start);
        }
        s.t_ready = rt.now();
        const DurationMs bg_ms = rt.now() - bg_start;
        if (on_complete) on_complete(s, costs, bg_ms);
        slow_q.put(std::move(s));
    }
}

} // namespace loadflow
