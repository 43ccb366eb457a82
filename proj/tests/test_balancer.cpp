#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "loadflow/balancer.hpp"
#include "loadflow/runtime.hpp"

using namespace loadflow;
using namespace lftest;

namespace {

struct Rig {
    std::unique_ptr<Runtime> rt = make_virtual_runtime();
    std::unique_ptr<SampleQueue> fast;
    std::unique_ptr<TempQueue> temp;
    std::unique_ptr<SampleQueue> slow;

    Rig() {
        fast = std::make_unique<SampleQueue>(*rt, 100, QueueRole::fast);
        temp = std::make_unique<TempQueue>(*rt, 100, QueueRole::temp);
        slow = std::make_unique<SampleQueue>(*rt, 100, QueueRole::slow);
    }
};

} // namespace

TEST_CASE("chain [100,200] under t_out 500 routes fast after 300 ms") {
    Rig rig;
    auto chain = fixed_cost_chain({100, 200});
    RouteResult res;
    rig.rt->spawn("w", [&] {
        Rng rng(1);
        res = process_sample(make_sample(1, 10, chain.get()), 500, *rig.fast, *rig.temp,
                             *rig.rt, rng);
    });
    rig.rt->run();
    CHECK(res.route == Route::fast);
    CHECK(res.foreground_ms == 300);
    CHECK(rig.rt->now() == 300);
    auto s = rig.fast->try_get();
    REQUIRE(s.has_value());
    CHECK(s->classification == SampleClass::fast);
    CHECK(s->next_index == 2);
    CHECK(s->t_ready == 300);
    CHECK(!rig.temp->try_get().has_value());
}

TEST_CASE("chain [300,400,200] under t_out 500: interrupt fires at exactly 500") {
    Rig rig;
    auto chain = fixed_cost_chain({300, 400, 200}, {0.5, 0.5, 0.5});
    RouteResult res;
    rig.rt->spawn("w", [&] {
        Rng rng(1);
        res = process_sample(make_sample(7, 64, chain.get()), 500, *rig.fast, *rig.temp,
                             *rig.rt, rng);
    });
    rig.rt->run();
    CHECK(res.route == Route::temp);
    CHECK(res.foreground_ms == 500); // charged exactly the budget
    CHECK(res.timeout_index == 1);
    CHECK(rig.rt->now() == 500); // virtual-time interrupt, not the full 700
    auto item = rig.temp->try_get();
    REQUIRE(item.has_value());
    CHECK(item->resume_index == 1);
    CHECK(item->sample.classification == SampleClass::slow);
    // only transform 0 applied: one halving, partial transform 1 discarded
    CHECK(item->sample.size_bytes == doctest::Approx(32.0));
    CHECK(item->sample.next_index == 1);
}

TEST_CASE("single transform of cost exactly t_out is fast (inclusive boundary)") {
    Rig rig;
    auto chain = fixed_cost_chain({500});
    RouteResult res;
    rig.rt->spawn("w", [&] {
        Rng rng(1);
        res = process_sample(make_sample(2, 10, chain.get()), 500, *rig.fast, *rig.temp,
                             *rig.rt, rng);
    });
    rig.rt->run();
    CHECK(res.route == Route::fast);
    CHECK(res.foreground_ms == 500);
}

TEST_CASE("resume from index 1 of [300,400,200] costs 600 ms background") {
    Rig rig;
    auto chain = fixed_cost_chain({300, 400, 200});
    rig.rt->spawn("producer", [&] {
        Rng rng(1);
        process_sample(make_sample(3, 10, chain.get()), 500, *rig.fast, *rig.temp, *rig.rt,
                       rng);
        rig.temp->close();
    });
    DurationMs background = -1;
    std::vector<DurationMs> full_costs;
    rig.rt->spawn("resumer", [&] {
        Rng rng(2);
        resume_slow(*rig.temp, *rig.slow, *rig.rt, rng,
                    [&](const Sample&, const std::vector<DurationMs>& costs,
                        DurationMs bg) {
                        background = bg;
                        full_costs = costs;
                    });
    });
    rig.rt->run();
    CHECK(background == 600); // interrupted transform restarted: 400 + 200
    CHECK(full_costs == std::vector<DurationMs>{300, 400, 200});
    auto s = rig.slow->try_get();
    REQUIRE(s.has_value());
    CHECK(s->next_index == 3);
    CHECK(s->classification == SampleClass::slow);
}

TEST_CASE("timeout inside the first transform re-executes the whole chain") {
    Rig rig;
    auto chain = fixed_cost_chain({900, 100});
    rig.rt->spawn("producer", [&] {
        Rng rng(1);
        auto res = process_sample(make_sample(4, 10, chain.get()), 500, *rig.fast,
                                  *rig.temp, *rig.rt, rng);
        CHECK(res.timeout_index == 0);
        rig.temp->close();
    });
    DurationMs background = -1;
    rig.rt->spawn("resumer", [&] {
        Rng rng(2);
        resume_slow(*rig.temp, *rig.slow, *rig.rt, rng,
                    [&](const Sample&, const std::vector<DurationMs>&, DurationMs bg) {
                        background = bg;
                    });
    });
    rig.rt->run();
    CHECK(background == 1000); // full chain from scratch
}

TEST_CASE("with no timeout the balancer degenerates to synchronous behavior") {
    Rig rig;
    auto chain = fixed_cost_chain({300, 400, 200});
    int fast_routed = 0;
    rig.rt->spawn("w", [&] {
        Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            auto res = process_sample(make_sample(i, 10, chain.get()), kNoTimeout,
                                      *rig.fast, *rig.temp, *rig.rt, rng);
            if (res.route == Route::fast) ++fast_routed;
        }
    });
    rig.rt->run();
    CHECK(fast_routed == 20);
    CHECK(rig.temp->size() == 0);
    CHECK(rig.rt->now() == 20 * 900);
}

TEST_CASE("preconditions: started or classified samples are rejected") {
    Rig rig;
    auto chain = fixed_cost_chain({10});
    rig.rt->spawn("w", [&] {
        Rng rng(1);
        Sample started = make_sample(1, 10, chain.get());
        started.next_index = 1;
        CHECK_THROWS_AS(process_sample(std::move(started), 100, *rig.fast, *rig.temp,
                                       *rig.rt, rng),
                        std::invalid_argument);
        Sample classified = make_sample(2, 10, chain.get());
        classified.classification = SampleClass::fast;
        CHECK_THROWS_AS(process_sample(std::move(classified), 100, *rig.fast, *rig.temp,
                                       *rig.rt, rng),
                        std::invalid_argument);
    });
    rig.rt->run();
}

// Resumability equivalence on a real-function chain: the timeout path must
// produce byte-identical payloads to the straight sequential path.
TEST_CASE("real-function chain: resumed output equals direct sequential output") {
    auto make_real_chain = [] {
        std::vector<Transform> ts;
        for (int i = 0; i < 4; ++i) {
            Transform t;
            t.name = "op" + std::to_string(i);
            t.apply = [i](Payload p) {
                for (auto& v : p) v = v * (i + 2) + i;
                return p;
            };
            ts.push_back(std::move(t));
        }
        return std::make_shared<TransformChain>(std::move(ts));
    };
    auto chain = make_real_chain();

    // Sequential oracle (no timeout), computed without the balancer.
    Payload expected = {1.0, 2.0, 3.0};
    {
        auto rt = make_virtual_runtime();
        Sample s = make_sample(1, 10, chain.get());
        s.payload = expected;
        rt->spawn("oracle", [&] {
            Rng rng(1);
            apply_all_transforms(s, *rt, rng);
        });
        rt->run();
        expected = s.payload;
    }

    // Timeout path in realtime mode: wall-clock budget of 1 ms with a slow
    // middle transform forces the cooperative interrupt.
    auto rt = make_realtime_runtime();
    SampleQueue fast(*rt, 10, QueueRole::fast);
    TempQueue temp(*rt, 10, QueueRole::temp);
    SampleQueue slow(*rt, 10, QueueRole::slow);
    auto slow_chain = std::make_shared<TransformChain>(*chain);
    slow_chain->transforms()[1].apply = [rt = rt.get()](Payload p) {
        rt->sleep(5); // exceeds the budget mid-chain
        for (auto& v : p) v = v * 3 + 1;
        return p;
    };
    rt->spawn("producer", [&] {
        Rng rng(1);
        Sample s = make_sample(1, 10, slow_chain.get());
        s.payload = {1.0, 2.0, 3.0};
        auto res = process_sample(std::move(s), 1, fast, temp, *rt, rng);
        CHECK(res.route == Route::temp);
        temp.close();
    });
    Payload resumed;
    rt->spawn("resumer", [&] {
        Rng rng(2);
        resume_slow(temp, slow, *rt, rng);
        slow.close();
    });
    rt->spawn("collector", [&] {
        auto s = slow.get();
        REQUIRE(s.has_value());
        resumed = s->payload;
    });
    rt->run();
    CHECK(resumed == expected);
}

// Property: for deterministic chains, any timeout produces the same final
// state (size trace and completion) as the no-timeout sequential path.
TEST_CASE("resumability equivalence over random chains and timeouts") {
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<int> len_dist(1, 8);
    std::uniform_int_distribution<DurationMs> cost_dist(0, 400);
    std::uniform_int_distribution<DurationMs> tout_dist(1, 1200);
    const double factor_choices[] = {0.5, 0.8, 1.0, 1.25, 2.0};
    std::uniform_int_distribution<int> f_dist(0, 4);

    for (int trial = 0; trial < 300; ++trial) {
        int n = len_dist(gen);
        std::vector<DurationMs> costs;
        std::vector<double> factors;
        for (int i = 0; i < n; ++i) {
            costs.push_back(cost_dist(gen));
            factors.push_back(factor_choices[f_dist(gen)]);
        }
        DurationMs t_out = tout_dist(gen);
        auto chain = fixed_cost_chain(costs, factors);

        double expected_size = 1000.0;
        DurationMs total = 0;
        for (int i = 0; i < n; ++i) {
            expected_size *= factors[i];
            total += costs[i];
        }

        Rig rig;
        Sample final_sample;
        rig.rt->spawn("producer", [&] {
            Rng rng(trial);
            process_sample(make_sample(trial, 1000.0, chain.get()), t_out, *rig.fast,
                           *rig.temp, *rig.rt, rng);
            rig.temp->close();
            rig.fast->close();
        });
        rig.rt->spawn("resumer", [&] {
            Rng rng(trial + 1);
            resume_slow(*rig.temp, *rig.slow, *rig.rt, rng);
            rig.slow->close();
        });
        rig.rt->spawn("collector", [&] {
            if (auto s = rig.fast->get()) final_sample = *s;
        });
        rig.rt->spawn("collector2", [&] {
            if (auto s = rig.slow->get()) final_sample = *s;
        });
        rig.rt->run();

        REQUIRE(final_sample.next_index == static_cast<std::size_t>(n));
        REQUIRE(final_sample.size_bytes == doctest::Approx(expected_size).epsilon(1e-9));
        const bool timed_out = total > t_out;
        REQUIRE(final_sample.classification ==
                (timed_out ? SampleClass::slow : SampleClass::fast));
    }
}

// Critical-path bound: in virtual mode the foreground charge is exactly t_out
// whenever a timeout fires.
TEST_CASE("foreground charge is exactly t_out on every timeout") {
    std::mt19937_64 gen(5);
    std::uniform_int_distribution<DurationMs> cost_dist(1, 300);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<DurationMs> costs = {cost_dist(gen), cost_dist(gen), cost_dist(gen)};
        DurationMs total = costs[0] + costs[1] + costs[2];
        DurationMs t_out = std::max<DurationMs>(1, total / 2);
        auto chain = fixed_cost_chain(costs);
        Rig rig;
        RouteResult res;
        rig.rt->spawn("w", [&] {
            Rng rng(trial);
            res = process_sample(make_sample(trial, 1, chain.get()), t_out, *rig.fast,
                                 *rig.temp, *rig.rt, rng);
        });
        rig.rt->run();
        if (res.route == Route::temp) {
            REQUIRE(res.foreground_ms == t_out);
            REQUIRE(rig.rt->now() == t_out);
        } else {
            REQUIRE(total <= t_out);
        }
    }
}

// Collector helper above leaves one of the two collectors blocked when the
// other receives the sample; closing both queues releases it. This test keeps
// that invariant honest.
TEST_CASE("fast queue close releases a blocked collector") {
    Rig rig;
    rig.rt->spawn("closer", [&] {
        rig.rt->sleep(5);
        rig.fast->close();
    });
    bool got_end = false;
    rig.rt->spawn("collector", [&] { got_end = !rig.fast->get().has_value(); });
    rig.rt->run();
    CHECK(got_end);
}
