#pragma once

#include <vector>

#include "loadflow/balancer.hpp"
#include "loadflow/queue.hpp"
#include "loadflow/sample.hpp"

namespace loadflow {

// Synchronous batch loader with PyTorch-DataLoader semantics: samples are
// pre-assigned to batches by position (ids [kB, (k+1)B) form batch k), workers
// pull the next unclaimed sample of the oldest incomplete batches (up to
// prefetch_factor batches in flight), and batch k is published only when ALL
// its members are preprocessed, in FIFO batch order. Head-of-line blocking by
// construction.
struct SyncLoaderConfig {
    std::size_t batch_size = 1;
    int n_workers = 1;
    int prefetch_factor = 2; // batches loaded in advance per worker
};

struct SyncBatchRecord {
    std::size_t batch_index = 0;
    TimeMs published_at = 0;          // seal time
    TimeMs max_member_completion = 0; // completion time of the slowest member
};

// Spawns the loader's worker actors on rt; batches flow into batch_q, which
// is closed after the last batch. `records` (optional) collects per-batch
// publish audit rows.
void start_sync_loader(Runtime& rt, std::vector<Sample> samples,
                       const SyncLoaderConfig& cfg, BatchQueue& batch_q,
                       std::vector<SyncBatchRecord>* records = nullptr);

// Pecan-style AutoOrder: within each barrier-delimited section, stably
// reorders transforms deflationary (size_factor < 1) first, neutral next,
// inflationary last. Barriers never move and are never crossed.
TransformChain autoorder(const TransformChain& chain);

// Image-size heuristic classifier (ablation stand-in for the timeout
// classifier): slow iff the input payload exceeds the cutoff.
SampleClass size_heuristic_classify(const Sample& sample, double size_cutoff_bytes);

} // namespace loadflow
