#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "loadflow/queue.hpp"
#include "loadflow/runtime.hpp"

using namespace loadflow;

TEST_CASE("virtual clock starts at zero and advances only via events") {
    auto rt = make_virtual_runtime();
    CHECK(rt->now() == 0);

    TimeMs seen = -1;
    rt->spawn("sleeper", [&] {
        rt->sleep(500);
        seen = rt->now();
    });
    rt->run();
    CHECK(seen == 500);
    CHECK(rt->now() == 500);
}

TEST_CASE("realtime clock is monotone") {
    auto rt = make_realtime_runtime();
    TimeMs a = rt->now();
    rt->sleep(1);
    TimeMs b = rt->now();
    CHECK(b >= a);
}

TEST_CASE("virtual actors interleave in deterministic time order") {
    auto rt = make_virtual_runtime();
    std::vector<int> order;
    rt->spawn("a", [&] {
        rt->sleep(30);
        order.push_back(1);
        rt->sleep(40); // wakes at 70
        order.push_back(3);
    });
    rt->spawn("b", [&] {
        rt->sleep(50);
        order.push_back(2);
        rt->sleep(50); // wakes at 100
        order.push_back(4);
    });
    rt->run();
    CHECK(order == std::vector<int>{1, 2, 3, 4});
    CHECK(rt->now() == 100);
}

TEST_CASE("same wake time resolves by schedule order") {
    auto rt = make_virtual_runtime();
    std::vector<int> order;
    rt->spawn("first", [&] {
        rt->sleep(10);
        order.push_back(1);
    });
    rt->spawn("second", [&] {
        rt->sleep(10);
        order.push_back(2);
    });
    rt->run();
    CHECK(order == std::vector<int>{1, 2});
}

TEST_CASE("spawn from a running actor") {
    auto rt = make_virtual_runtime();
    std::vector<int> order;
    rt->spawn("parent", [&] {
        order.push_back(1);
        rt->spawn("child", [&] {
            order.push_back(2);
            rt->sleep(5);
            order.push_back(4);
        });
        rt->sleep(1);
        order.push_back(3);
    });
    rt->run();
    CHECK(order == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("virtual cond wait/notify wakes FIFO") {
    auto rt = make_virtual_runtime();
    auto mu = rt->make_mutex();
    auto cv = rt->make_cond();
    bool ready = false;
    std::vector<int> order;

    for (int i = 0; i < 3; ++i) {
        rt->spawn("waiter", [&, i] {
            LockGuard g(*mu);
            while (!ready) cv->wait(*mu);
            order.push_back(i);
        });
    }
    rt->spawn("waker", [&] {
        rt->sleep(10);
        LockGuard g(*mu);
        ready = true;
        cv->notify_all();
    });
    rt->run();
    CHECK(order == std::vector<int>{0, 1, 2});
}

TEST_CASE("virtual deadlock is detected and reported") {
    auto rt = make_virtual_runtime();
    auto mu = rt->make_mutex();
    auto cv = rt->make_cond();
    rt->spawn("stuck", [&] {
        LockGuard g(*mu);
        cv->wait(*mu); // nobody will ever notify
    });
    CHECK_THROWS_WITH_AS(rt->run(), doctest::Contains("stuck"), std::logic_error);
}

TEST_CASE("actor exception surfaces from run") {
    auto rt = make_virtual_runtime();
    rt->spawn("boom", [&] { throw std::runtime_error("kaput"); });
    CHECK_THROWS_WITH_AS(rt->run(), doctest::Contains("kaput"), std::runtime_error);
}

TEST_CASE("virtual sleep(0) yields without advancing time") {
    auto rt = make_virtual_runtime();
    TimeMs t = -1;
    rt->spawn("y", [&] {
        rt->sleep(0);
        t = rt->now();
    });
    rt->run();
    CHECK(t == 0);
}
