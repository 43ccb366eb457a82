#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "loadflow/batcher.hpp"
#include "loadflow/runtime.hpp"

using namespace loadflow;
using namespace lftest;

namespace {

struct Rig {
    std::unique_ptr<Runtime> rt = make_virtual_runtime();
    std::shared_ptr<TransformChain> chain = fixed_cost_chain({1});
    std::unique_ptr<SampleQueue> fast;
    std::unique_ptr<SampleQueue> slow;
    std::unique_ptr<BatchQueue> batch_q;
    std::vector<SampleQueue*> fast_ptr, slow_ptr;

    Rig() {
        fast = std::make_unique<SampleQueue>(*rt, 100, QueueRole::fast);
        slow = std::make_unique<SampleQueue>(*rt, 100, QueueRole::slow);
        batch_q = std::make_unique<BatchQueue>(*rt, 100, QueueRole::batch);
        fast_ptr = {fast.get()};
        slow_ptr = {slow.get()};
    }

    Sample done_sample(std::uint64_t id) {
        Sample s = make_sample(id, 10, chain.get());
        s.next_index = chain->size();
        return s;
    }

    std::vector<std::vector<std::uint64_t>> drain_ids() {
        std::vector<std::vector<std::uint64_t>> out;
        while (auto b = batch_q->try_get()) {
            std::vector<std::uint64_t> ids;
            for (const auto& s : b->samples) ids.push_back(s.id);
            out.push_back(std::move(ids));
        }
        return out;
    }
};

} // namespace

TEST_CASE("fast-first preference: fast [a,b,c] beats slow [d] at batch_size 3") {
    Rig rig;
    rig.fast->put(rig.done_sample(0));
    rig.fast->put(rig.done_sample(1));
    rig.fast->put(rig.done_sample(2));
    rig.slow->put(rig.done_sample(3));
    rig.fast->close();
    rig.slow->close();
    rig.rt->spawn("batcher", [&] {
        build_batches(rig.fast_ptr, rig.slow_ptr, *rig.batch_q, BatcherConfig{3, 10},
                      *rig.rt);
    });
    rig.rt->run();
    auto batches = rig.drain_ids();
    REQUIRE(batches.size() == 2);
    CHECK(batches[0] == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(batches[1] == std::vector<std::uint64_t>{3}); // end-of-epoch flush
}

TEST_CASE("fallback to slow when fast is empty") {
    Rig rig;
    rig.slow->put(rig.done_sample(10));
    rig.slow->put(rig.done_sample(11));
    rig.fast->close();
    rig.slow->close();
    rig.rt->spawn("batcher", [&] {
        build_batches(rig.fast_ptr, rig.slow_ptr, *rig.batch_q, BatcherConfig{2, 10},
                      *rig.rt);
    });
    rig.rt->run();
    auto batches = rig.drain_ids();
    REQUIRE(batches.size() == 1);
    CHECK(batches[0] == std::vector<std::uint64_t>{10, 11});
}

TEST_CASE("fast drained before slow within one batch") {
    Rig rig;
    rig.fast->put(rig.done_sample(0));
    rig.slow->put(rig.done_sample(1));
    rig.fast->close();
    rig.slow->close();
    BatcherTrace trace;
    rig.rt->spawn("batcher", [&] {
        build_batches(rig.fast_ptr, rig.slow_ptr, *rig.batch_q, BatcherConfig{2, 10},
                      *rig.rt, &trace);
    });
    rig.rt->run();
    auto batches = rig.drain_ids();
    REQUIRE(batches.size() == 1);
    CHECK(batches[0] == std::vector<std::uint64_t>{0, 1});
    REQUIRE(trace.slots.size() == 2);
    CHECK(trace.slots[0].source == QueueRole::fast);
    CHECK(trace.slots[1].source == QueueRole::slow);
}

TEST_CASE("sleeps 10 ms when no source has samples") {
    Rig rig;
    rig.rt->spawn("batcher", [&] {
        build_batches(rig.fast_ptr, rig.slow_ptr, *rig.batch_q, BatcherConfig{1, 10},
                      *rig.rt);
    });
    rig.rt->spawn("late_producer", [&] {
        rig.rt->sleep(25);
        rig.fast->put(rig.done_sample(0));
        rig.fast->close();
        rig.slow->close();
    });
    rig.rt->run();
    // Batcher polls at 0 (empty), sleeps to 10, 20, 30; sample arrives at 25,
    // taken on the t=30 poll.
    auto batches = rig.drain_ids();
    REQUIRE(batches.size() == 1);
    CHECK(rig.batch_q->drained());
}

TEST_CASE("round-robin across multiple worker queues") {
    auto rt = make_virtual_runtime();
    auto chain = fixed_cost_chain({1});
    std::vector<std::unique_ptr<SampleQueue>> fasts;
    std::vector<SampleQueue*> fast_ptr;
    for (int i = 0; i < 3; ++i) {
        fasts.push_back(std::make_unique<SampleQueue>(*rt, 100, QueueRole::fast));
        fast_ptr.push_back(fasts.back().get());
    }
    SampleQueue slow(*rt, 100, QueueRole::slow);
    std::vector<SampleQueue*> slow_ptr = {&slow};
    BatchQueue batch_q(*rt, 100, QueueRole::batch);

    // Two samples per worker queue; round-robin should interleave 0,1,2,0,1,2.
    std::uint64_t id = 0;
    for (int pass = 0; pass < 2; ++pass) {
        for (int w = 0; w < 3; ++w) {
            Sample s;
            s.id = id++;
            s.chain = chain.get();
            s.next_index = 1;
            s.bytes_out = 1;
            fasts[w]->put(std::move(s));
        }
    }
    for (auto& q : fasts) q->close();
    slow.close();
    rt->spawn("batcher", [&] {
        build_batches(fast_ptr, slow_ptr, batch_q, BatcherConfig{6, 10}, *rt);
    });
    rt->run();
    auto b = batch_q.try_get();
    REQUIRE(b.has_value());
    std::vector<std::uint64_t> ids;
    for (const auto& s : b->samples) ids.push_back(s.id);
    // queue contents: q0=[0,3] q1=[1,4] q2=[2,5]
    CHECK(ids == std::vector<std::uint64_t>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("exactly-once batching over a random mixed scenario") {
    Rig rig;
    constexpr int kTotal = 257;
    rig.rt->spawn("fast_producer", [&] {
        for (int i = 0; i < kTotal; i += 2) {
            rig.fast->put(rig.done_sample(static_cast<std::uint64_t>(i)));
            if (i % 10 == 0) rig.rt->sleep(3);
        }
        rig.fast->close();
    });
    rig.rt->spawn("slow_producer", [&] {
        for (int i = 1; i < kTotal; i += 2) {
            rig.slow->put(rig.done_sample(static_cast<std::uint64_t>(i)));
            if (i % 7 == 0) rig.rt->sleep(5);
        }
        rig.slow->close();
    });
    std::vector<std::vector<std::uint64_t>> batches;
    rig.rt->spawn("batcher", [&] {
        build_batches(rig.fast_ptr, rig.slow_ptr, *rig.batch_q, BatcherConfig{10, 10},
                      *rig.rt);
    });
    rig.rt->spawn("collector", [&] {
        while (auto b = rig.batch_q->get()) {
            std::vector<std::uint64_t> ids;
            for (const auto& s : b->samples) ids.push_back(s.id);
            batches.push_back(std::move(ids));
        }
    });
    rig.rt->run();

    std::multiset<std::uint64_t> seen;
    for (std::size_t i = 0; i < batches.size(); ++i) {
        // every batch full except possibly the last
        if (i + 1 < batches.size()) CHECK(batches[i].size() == 10);
        for (auto id : batches[i]) seen.insert(id);
    }
    REQUIRE(seen.size() == kTotal);
    std::uint64_t expect = 0;
    for (auto id : seen) CHECK(id == expect++);
}

TEST_CASE("fast-priority: a fast sample is never passed over for a slow one") {
    Rig rig;
    BatcherTrace trace;
    rig.rt->spawn("producers", [&] {
        for (int i = 0; i < 40; ++i) {
            if (i % 3 == 0) {
                rig.slow->put(rig.done_sample(1000 + i));
            } else {
                rig.fast->put(rig.done_sample(i));
            }
            if (i % 4 == 0) rig.rt->sleep(7);
        }
        rig.fast->close();
        rig.slow->close();
    });
    rig.rt->spawn("batcher", [&] {
        build_batches(rig.fast_ptr, rig.slow_ptr, *rig.batch_q, BatcherConfig{4, 10},
                      *rig.rt, &trace);
    });
    rig.rt->spawn("collector", [&] {
        while (rig.batch_q->get()) {
        }
    });
    rig.rt->run();
    REQUIRE(!trace.slots.empty());
    for (const auto& slot : trace.slots) {
        if (slot.fast_available) CHECK(slot.source == QueueRole::fast);
    }
}

// Starvation bound: once a slow sample is enqueued, it appears within the
// next ceil(slow_queue_len / batch_size) + 2 batches even under a continuous
// fast supply.
TEST_CASE("no starvation of slow samples under continuous fast supply") {
    Rig rig;
    constexpr std::size_t kBatch = 4;
    // Fast producer: steady supply, one sample every 5 ms, forever-ish.
    rig.rt->spawn("fast_producer", [&] {
        for (int i = 0; i < 200; ++i) {
            rig.fast->put(rig.done_sample(static_cast<std::uint64_t>(i)));
            rig.rt->sleep(5);
        }
        rig.fast->close();
    });
    TimeMs slow_enqueued_at = -1;
    std::size_t slow_qlen_at_enqueue = 0;
    rig.rt->spawn("slow_producer", [&] {
        rig.rt->sleep(100);
        slow_qlen_at_enqueue = rig.slow->size();
        rig.slow->put(rig.done_sample(9999));
        slow_enqueued_at = rig.rt->now();
        rig.rt->sleep(400);
        rig.slow->close();
    });
    std::vector<std::pair<TimeMs, std::vector<std::uint64_t>>> batches;
    rig.rt->spawn("batcher", [&] {
        build_batches(rig.fast_ptr, rig.slow_ptr, *rig.batch_q, BatcherConfig{kBatch, 10},
                      *rig.rt);
    });
    rig.rt->spawn("collector", [&] {
        while (auto b = rig.batch_q->get()) {
            std::vector<std::uint64_t> ids;
            for (const auto& s : b->samples) ids.push_back(s.id);
            batches.emplace_back(b->sealed_at, std::move(ids));
        }
    });
    rig.rt->run();

    // Find the first batch sealed at/after the slow enqueue; 9999 must land
    // within K = ceil(len/B) + 2 batches from there.
    std::size_t first_after = batches.size();
    std::size_t slow_batch = batches.size();
    for (std::size_t i = 0; i < batches.size(); ++i) {
        if (first_after == batches.size() && batches[i].first >= slow_enqueued_at) {
            first_after = i;
        }
        if (std::find(batches[i].second.begin(), batches[i].second.end(), 9999ULL) !=
            batches[i].second.end()) {
            slow_batch = i;
        }
    }
    REQUIRE(slow_batch < batches.size());
    const std::size_t bound = (slow_qlen_at_enqueue + kBatch - 1) / kBatch + 2;
    CHECK(slow_batch - first_after <= bound);
}
