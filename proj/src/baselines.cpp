#include "loadflow/baselines.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>

namespace loadflow {

namespace {

struct SyncState {
    std::unique_ptr<Mutex> mu;
    std::unique_ptr<Cond> cv;
    std::vector<Sample> samples;
    std::vector<bool> claimed;
    std::vector<TimeMs> completion; // per sample, -1 while pending
    std::vector<std::size_t> remaining; // per batch
    std::size_t batch_size = 0;
    std::size_t n_batches = 0;
    std::size_t window = 1; // batches in flight
    std::size_t head = 0;   // oldest unpublished batch
    bool publishing = false;
    int workers_alive = 0;

    std::size_t batch_begin(std::size_t k) const { return k * batch_size; }
    std::size_t batch_end(std::size_t k) const {
        return std::min(samples.size(), (k + 1) * batch_size);
    }
};

// Pre: state.mu held. Index of the next claimable sample within the in-flight
// window, or npos.
std::size_t find_claimable(const SyncState& st) {
    const std::size_t limit = std::min(st.n_batches, st.head + st.window);
    for (std::size_t k = st.head; k < limit; ++k) {
        for (std::size_t i = st.batch_begin(k); i < st.batch_end(k); ++i) {
            if (!st.claimed[i]) return i;
        }
    }
    return static_cast<std::size_t>(-1);
}

void sync_worker(SyncState& st, BatchQueue& batch_q, Runtime& rt, Rng& rng,
                 std::vector<SyncBatchRecord>* records) {
    for (;;) {
        std::size_t idx;
        Sample local;
        {
            LockGuard g(*st.mu);
            for (;;) {
                if (st.head >= st.n_batches) {
                    // everything published
                    --st.workers_alive;
                    if (st.workers_alive == 0) batch_q.close();
                    return;
                }
                idx = find_claimable(st);
                if (idx != static_cast<std::size_t>(-1)) break;
                st.cv->wait(*st.mu);
            }
            st.claimed[idx] = true;
            local = std::move(st.samples[idx]);
        }

        apply_all_transforms(local, rt, rng);
        local.t_ready = rt.now();

        bool publish = false;
        {
            LockGuard g(*st.mu);
            st.completion[idx] = rt.now();
            st.samples[idx] = std::move(local);
            const std::size_t k = idx / st.batch_size;
            if (--st.remaining[k] == 0 && !st.publishing) {
                st.publishing = true;
                publish = true;
            }
        }
        if (!publish) continue;

        // Single publisher at a time: drains every consecutive complete head
        // batch in FIFO order. State is consistent whenever the lock drops
        // for the (possibly blocking) queue put.
        for (;;) {
            Batch batch;
            std::size_t k;
            {
                LockGuard g(*st.mu);
                if (st.head >= st.n_batches || st.remaining[st.head] != 0) {
                    st.publishing = false;
                    st.cv->notify_all(); // window may have moved
                    break;
                }
                k = st.head;
                TimeMs max_completion = 0;
                for (std::size_t i = st.batch_begin(k); i < st.batch_end(k); ++i) {
                    max_completion = std::max(max_completion, st.completion[i]);
                    batch.samples.push_back(std::move(st.samples[i]));
                }
                batch.sealed_at = rt.now();
                ++st.head;
                if (records != nullptr) {
                    records->push_back(SyncBatchRecord{k, batch.sealed_at, max_completion});
                }
                st.cv->notify_all(); // head advanced: new claims possible
            }
            batch_q.put(std::move(batch));
        }
    }
}

} // namespace

void start_sync_loader(Runtime& rt, std::vector<Sample> samples,
                       const SyncLoaderConfig& cfg, BatchQueue& batch_q,
                       std::vector<SyncBatchRecord>* records) {
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (cfg.n_workers < 1) throw std::invalid_argument("n_workers must be >= 1");
    if (cfg.prefetch_factor < 1) throw std::invalid_argument("prefetch_factor must be >= 1");

    auto st = std::make_shared<SyncState>();
    st->mu = rt.make_mutex();
    st->cv = rt.make_cond();
    st->batch_size = cfg.batch_size;
    st->n_batches = (samples.size() + cfg.batch_size - 1) / cfg.batch_size;
    // prefetch_factor is per worker: the loader keeps up to
    // n_workers * prefetch_factor batches in flight.
    st->window = static_cast<std::size_t>(cfg.prefetch_factor) *
                 static_cast<std::size_t>(cfg.n_workers);
    st->claimed.assign(samples.size(), false);
    st->completion.assign(samples.size(), -1);
    st->samples = std::move(samples);
    st->remaining.resize(st->n_batches);
    for (std::size_t k = 0; k < st->n_batches; ++k) {
        st->remaining[k] = st->batch_end(k) - st->batch_begin(k);
    }
    st->workers_alive = cfg.n_workers;

    if (st->n_batches == 0) {
        batch_q.close();
        return;
    }
    for (int w = 0; w < cfg.n_workers; ++w) {
        rt.spawn("sync_worker." + std::to_string(w),
                 [st, &batch_q, &rt, records, w] {
                     Rng rng(0x5f3c9d2bULL * (w + 1));
                     sync_worker(*st, batch_q, rt, rng, records);
                 });
    }
}

TransformChain autoorder(const TransformChain& chain) {
    auto klass = [](const Transform& t) {
        if (t.size_factor < 1.0) return 0; // deflationary first
        if (t.size_factor > 1.0) return 2; // inflationary last
        return 1;
    };
    std::vector<Transform> out = chain.transforms();
    for (auto [first, last] : chain.sections()) {
        if (out[first].barrier) continue; // pinned
        std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(first),
                         out.begin() + static_cast<std::ptrdiff_t>(last),
                         [&](const Transform& a, const Transform& b) {
                             return klass(a) < klass(b);
                         });
    }
    return TransformChain(std::move(out));
}

SampleClass size_heuristic_classify(const Sample& sample, double size_cutoff_bytes) {
    if (size_cutoff_bytes <= 0) throw std::invalid_argument("size cutoff must be > 0");
    return sample.size_bytes > size_cutoff_bytes ? SampleClass::slow : SampleClass::fast;
}

} // namespace loadflow
