#include "loadflow/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "loadflow/balancer.hpp"
#include "loadflow/baselines.hpp"
#include "loadflow/batcher.hpp"
#include "loadflow/worker_pool.hpp"

namespace loadflow {

const char* loader_name(LoaderKind k) {
    switch (k) {
        case LoaderKind::minato: return "minato";
        case LoaderKind::sync: return "sync";
        case LoaderKind::autoorder: return "autoorder";
        case LoaderKind::sizeheuristic: return "sizeheuristic";
    }
    return "?";
}

LoaderKind loader_from_name(const std::string& name) {
    if (name == "minato") return LoaderKind::minato;
    if (name == "sync") return LoaderKind::sync;
    if (name == "autoorder") return LoaderKind::autoorder;
    if (name == "sizeheuristic") return LoaderKind::sizeheuristic;
    throw std::invalid_argument("unknown loader: " + name +
                                " (expected minato|sync|autoorder|sizeheuristic)");
}

const char* mode_name(RunMode m) {
    return m == RunMode::virtual_time ? "virtual" : "realtime";
}

RunMode mode_from_name(const std::string& name) {
    if (name == "virtual") return RunMode::virtual_time;
    if (name == "realtime") return RunMode::realtime;
    throw std::invalid_argument("unknown mode: " + name + " (expected virtual|realtime)");
}

void ExperimentConfig::validate() const {
    workload.validate();
    if (n_consumers < 1) throw std::invalid_argument("n_consumers must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (queue_capacity < 1) throw std::invalid_argument("queue_capacity must be >= 1");
    if (consumer.compute_per_batch < 0 || consumer.transfer_per_batch < 0) {
        throw std::invalid_argument("consumer durations must be >= 0");
    }
    if (scheduler.initial_workers < 1 || scheduler.initial_workers > scheduler.max_workers) {
        throw std::invalid_argument("scheduler.initial_workers out of [1, max_workers]");
    }
    if (scheduler.delta_clip < 1) throw std::invalid_argument("delta_clip must be >= 1");
    if (sync_workers < 1) throw std::invalid_argument("sync_workers must be >= 1");
    if (prefetch_factor < 1) throw std::invalid_argument("prefetch_factor must be >= 1");
    if (size_cutoff_bytes <= 0) throw std::invalid_argument("size_cutoff_bytes must be > 0");
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& c) {
    ExperimentConfig e;
    const auto kind = workload_from_name(c.get_str("workload.name"));
    e.workload = default_spec(kind, c.get_int("workload.n_samples", 1000),
                              static_cast<std::uint64_t>(c.get_int("workload.seed", 1)));
    e.workload.load_latency = c.get_int("workload.load_latency_ms", 0);
    if (c.has("workload.avg_ms")) e.workload.target.avg = c.get_double("workload.avg_ms");
    if (c.has("workload.med_ms")) e.workload.target.med = c.get_double("workload.med_ms");
    if (c.has("workload.p75_ms")) e.workload.target.p75 = c.get_double("workload.p75_ms");
    if (c.has("workload.p90_ms")) e.workload.target.p90 = c.get_double("workload.p90_ms");
    if (c.has("workload.min_ms")) e.workload.target.min = c.get_double("workload.min_ms");
    if (c.has("workload.max_ms")) e.workload.target.max = c.get_double("workload.max_ms");

    e.loader = loader_from_name(c.get_str("pipeline.loader", "minato"));
    e.mode = mode_from_name(c.get_str("run.mode", "virtual"));
    e.n_consumers = static_cast<int>(c.get_int("pipeline.n_consumers", 1));
    e.batch_size = static_cast<int>(c.get_int("pipeline.batch_size", 24));
    e.queue_capacity = static_cast<std::size_t>(c.get_int("pipeline.queue_capacity", 100));
    e.sync_workers = static_cast<int>(c.get_int("pipeline.sync_workers", 12));
    e.prefetch_factor = static_cast<int>(c.get_int("pipeline.prefetch_factor", 2));
    e.size_cutoff_bytes = c.get_double("pipeline.size_cutoff_mb", 150.0) * 1e6;

    e.consumer.compute_per_batch = c.get_int("consumer.compute_ms", 200);
    e.consumer.transfer_per_batch = c.get_int("consumer.transfer_ms", 0);
    e.consumer.poll_sleep = c.get_int("consumer.poll_sleep_ms", 10);
    e.consumer.prefetch = c.get_bool("consumer.prefetch", true);
    if (c.has("consumer.max_batches")) e.consumer.max_batches = c.get_int("consumer.max_batches");
    if (c.has("consumer.horizon_ms")) e.consumer.horizon_ms = c.get_int("consumer.horizon_ms");

    e.scheduler_enabled = c.get_bool("scheduler.enabled", true);
    e.scheduler.alpha = c.get_double("scheduler.alpha", 2.0);
    e.scheduler.beta = c.get_double("scheduler.beta", 2.0);
    e.scheduler.theta_c = c.get_double("scheduler.theta_c", 0.7);
    e.scheduler.delta_clip = static_cast<int>(c.get_int("scheduler.delta_clip", 2));
    e.scheduler.initial_workers = static_cast<int>(c.get_int("scheduler.initial_workers", 12));
    e.scheduler.max_workers = static_cast<int>(
        c.get_int("scheduler.max_workers", e.scheduler.max_workers));
    e.scheduler.tick = c.get_int("scheduler.tick_ms", 500);
    e.scheduler.ema_alpha = c.get_double("scheduler.ema_alpha", 0.3);

    e.profiler.window = static_cast<std::size_t>(c.get_int("profiler.window", 1024));
    e.profiler.warmup = c.get_int("profiler.warmup_ms", 10'000);
    e.profiler.update_interval = c.get_int("profiler.update_interval_ms", 1'000);
    e.profiler.escalate_threshold = c.get_double("profiler.escalate_threshold", 0.35);
    e.profiler.deescalate_threshold = c.get_double("profiler.deescalate_threshold", 0.15);
    if (c.has("profiler.initial_timeout_ms")) {
        e.profiler.initial_timeout = c.get_int("profiler.initial_timeout_ms");
    }

    e.out_dir = c.get_str("run.out_dir", "");
    e.validate();
    return e;
}

namespace {

struct RunOutputs {
    std::vector<ConsumerStats> consumers;
    std::vector<SchedulerTraceRow> scheduler_trace;
    std::vector<std::pair<TimeMs, std::size_t>> queue_occupancy;
    std::int64_t slow_count = 0;
    std::int64_t fast_count = 0;
    int final_workers = 0;
};

void run_minato_pipeline(const ExperimentConfig& cfg, Runtime& rt, Stream stream,
                         RunOutputs& out) {
    const int mw = cfg.scheduler.max_workers;
    const std::size_t cap = cfg.queue_capacity;

    auto input = std::make_unique<BoundedQueue<Sample>>(rt, cap, QueueRole::input);
    std::vector<std::unique_ptr<SampleQueue>> fast, slow;
    std::vector<std::unique_ptr<TempQueue>> temp;
    std::vector<SampleQueue*> fast_ptr, slow_ptr;
    for (int i = 0; i < mw; ++i) {
        fast.push_back(std::make_unique<SampleQueue>(rt, cap, QueueRole::fast,
                                                     "fast." + std::to_string(i)));
        slow.push_back(std::make_unique<SampleQueue>(rt, cap, QueueRole::slow,
                                                     "slow." + std::to_string(i)));
        temp.push_back(std::make_unique<TempQueue>(rt, cap, QueueRole::temp,
                                                   "temp." + std::to_string(i)));
        fast_ptr.push_back(fast.back().get());
        slow_ptr.push_back(slow.back().get());
    }
    std::vector<std::unique_ptr<BatchQueue>> batch_qs;
    std::vector<BatchQueue*> batch_ptr;
    for (int c = 0; c < cfg.n_consumers; ++c) {
        batch_qs.push_back(std::make_unique<BatchQueue>(rt, cap, QueueRole::batch,
                                                        "batch." + std::to_string(c)));
        batch_ptr.push_back(batch_qs.back().get());
    }

    TimeoutPolicy policy;
    policy.set(cfg.profiler.initial_timeout, TimeoutPolicy::Source::configured);
    Profiler profiler(rt, cfg.profiler);

    std::vector<Rng> worker_rngs;
    std::vector<Rng> resume_rngs;
    for (int i = 0; i < mw; ++i) {
        worker_rngs.emplace_back(cfg.workload.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
        resume_rngs.emplace_back(cfg.workload.seed ^ (0xc2b2ae3d27d4eb4fULL * (i + 1)));
    }

    std::atomic<std::int64_t> slow_count{0};
    std::atomic<std::int64_t> fast_count{0};
    const bool by_size = cfg.loader == LoaderKind::sizeheuristic;
    const double cutoff = cfg.size_cutoff_bytes;

    PoolConfig pool_cfg{cfg.scheduler.initial_workers, mw};
    WorkerPool pool(
        rt, pool_cfg, *input,
        /*handler=*/
        [&, by_size, cutoff](int slot, Sample&& s) {
            const std::uint64_t id = s.id;
            const double size_in = s.bytes_in;
            pool.note_busy_start(slot);
            RouteResult r;
            if (by_size && size_heuristic_classify(s, cutoff) == SampleClass::slow) {
                s.classification = SampleClass::slow;
                temp[slot]->put(TempItem{std::move(s), 0, {}});
                r.route = Route::temp;
                r.foreground_ms = 0;
            } else {
                const DurationMs t_out = by_size ? kNoTimeout : policy.timeout();
                r = process_sample(std::move(s), t_out, *fast[slot], *temp[slot], rt,
                                   worker_rngs[slot]);
            }
            pool.note_busy_end(slot, r.foreground_ms);
            if (r.route == Route::fast) {
                fast_count.fetch_add(1, std::memory_order_relaxed);
                profiler.record(
                    SampleStats::from_costs(id, size_in, std::move(r.exec_costs), false));
            } else {
                slow_count.fetch_add(1, std::memory_order_relaxed);
            }
        },
        /*on_slot_exit=*/
        [&](int slot) {
            fast[slot]->close();
            temp[slot]->close();
        });

    // Background resume workers, one per slot, paired with the slot's temp
    // and slow queues.
    for (int i = 0; i < mw; ++i) {
        rt.spawn("resume." + std::to_string(i), [&, i] {
            resume_slow(*temp[i], *slow[i], rt, resume_rngs[i],
                        [&](const Sample& s, const std::vector<DurationMs>& costs,
                            DurationMs) {
                            profiler.record(SampleStats::from_costs(
                                s.id, s.bytes_in, costs, true));
                        });
            slow[i]->close();
        });
    }

    // Feeder: materialized stream into the input queue, then close.
    rt.spawn("feeder", [&] {
        for (auto& s : stream.samples) {
            s.t_enqueue = rt.now();
            if (cfg.workload.load_latency > 0) rt.sleep(cfg.workload.load_latency);
            input->put(std::move(s));
        }
        input->close();
    });

    // One batcher per consumer, each owning its batch queue.
    std::vector<BatcherTrace> traces(cfg.n_consumers);
    for (int c = 0; c < cfg.n_consumers; ++c) {
        rt.spawn("batcher." + std::to_string(c), [&, c] {
            build_batches(fast_ptr, slow_ptr, *batch_qs[c],
                          BatcherConfig{static_cast<std::size_t>(cfg.batch_size), 10}, rt,
                          &traces[c]);
        });
    }

    out.consumers.assign(cfg.n_consumers, ConsumerStats{});
    for (int c = 0; c < cfg.n_consumers; ++c) {
        rt.spawn("consumer." + std::to_string(c), [&, c] {
            out.consumers[c] = run_consumer(cfg.consumer, *batch_qs[c], rt);
        });
    }

    if (cfg.scheduler_enabled && !by_size) {
        SchedulerConfig sc = cfg.scheduler;
        sc.q_max = static_cast<double>(cap);
        rt.spawn("scheduler", [&, sc] {
            scheduler_loop(pool, batch_ptr, sc, rt, &out.scheduler_trace);
        });
    }
    rt.spawn("profiler", [&] {
        profiler_loop(profiler, policy, rt, [&] { return pool.stopped(); });
    });

    pool.start();
    rt.run();

    out.slow_count = slow_count.load();
    out.fast_count = fast_count.load();
    out.final_workers = pool.target_active();
    for (auto& tr : traces) {
        out.queue_occupancy.insert(out.queue_occupancy.end(),
                                   tr.batch_queue_occupancy.begin(),
                                   tr.batch_queue_occupancy.end());
    }
    std::stable_sort(out.queue_occupancy.begin(), out.queue_occupancy.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream f(cfg.out_dir + "/profile.csv");
        profiler.dump_csv(f);
    }
}

void run_sync_pipeline(const ExperimentConfig& cfg, Runtime& rt, Stream stream,
                       RunOutputs& out) {
    // Pecan-style reordering applies AutoOrder to the shared chain.
    std::shared_ptr<TransformChain> chain = stream.chain;
    if (cfg.loader == LoaderKind::autoorder) {
        chain = std::make_shared<TransformChain>(autoorder(*stream.chain));
        for (auto& s : stream.samples) s.chain = chain.get();
    }

    // Batches are pre-assigned by position; batch k goes to consumer k mod n.
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    std::vector<std::vector<Sample>> shards(cfg.n_consumers);
    for (std::size_t i = 0; i < stream.samples.size(); ++i) {
        const std::size_t k = i / bs;
        shards[k % static_cast<std::size_t>(cfg.n_consumers)].push_back(
            std::move(stream.samples[i]));
    }

    std::vector<std::unique_ptr<BatchQueue>> batch_qs;
    for (int c = 0; c < cfg.n_consumers; ++c) {
        batch_qs.push_back(std::make_unique<BatchQueue>(rt, cfg.queue_capacity,
                                                        QueueRole::batch,
                                                        "batch." + std::to_string(c)));
    }

    SyncLoaderConfig sl{bs, cfg.sync_workers, cfg.prefetch_factor};
    for (int c = 0; c < cfg.n_consumers; ++c) {
        start_sync_loader(rt, std::move(shards[c]), sl, *batch_qs[c]);
    }

    out.consumers.assign(cfg.n_consumers, ConsumerStats{});
    for (int c = 0; c < cfg.n_consumers; ++c) {
        rt.spawn("consumer." + std::to_string(c), [&, c] {
            out.consumers[c] = run_consumer(cfg.consumer, *batch_qs[c], rt);
        });
    }
    rt.run();
    out.final_workers = cfg.sync_workers * cfg.n_consumers;
}

} // namespace

MetricsReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    auto rt = cfg.mode == RunMode::virtual_time ? make_virtual_runtime()
                                                : make_realtime_runtime();
    Stream stream = generate(cfg.workload);
    const std::int64_t n_generated = static_cast<std::int64_t>(stream.samples.size());
    // The chain must outlive the run; samples reference it by pointer.
    std::shared_ptr<TransformChain> chain_keepalive = stream.chain;

    RunOutputs out;
    bool partial = false;
    try {
        if (cfg.loader == LoaderKind::sync || cfg.loader == LoaderKind::autoorder) {
            run_sync_pipeline(cfg, *rt, std::move(stream), out);
        } else {
            run_minato_pipeline(cfg, *rt, std::move(stream), out);
        }
    } catch (const std::exception&) {
        if (cfg.mode == RunMode::virtual_time) throw; // deterministic mode: a bug
        partial = true; // realtime resource trouble: flag and report what we have
    }

    MetricsReport r;
    r.workload = workload_name(cfg.workload.kind);
    r.loader = loader_name(cfg.loader);
    r.mode = mode_name(cfg.mode);
    r.seed = cfg.workload.seed;
    r.n_samples = cfg.workload.n_samples;
    r.batch_size = cfg.batch_size;
    r.n_consumers = cfg.n_consumers;
    r.partial = partial;

    std::vector<BatchEvent> all_events;
    std::vector<std::uint64_t> consumed_ids;
    for (const auto& st : out.consumers) {
        ConsumerReport c;
        c.span_ms = st.span();
        c.busy_ms = st.busy;
        c.idle_ms = st.idle();
        c.busy_fraction = st.busy_fraction();
        c.batches = st.batches;
        c.samples = st.samples;
        c.mb_consumed = st.bytes / 1e6;
        r.consumers.push_back(c);
        r.completion_ms = std::max(r.completion_ms, st.end);
        r.total_mb += c.mb_consumed;
        all_events.insert(all_events.end(), st.events.begin(), st.events.end());
        consumed_ids.insert(consumed_ids.end(), st.consumed_ids.begin(),
                            st.consumed_ids.end());
        for (const auto& e : st.events) {
            if (e.n_samples < cfg.batch_size) ++r.short_batches;
        }
    }
    r.avg_throughput_mbps =
        r.completion_ms > 0 ? r.total_mb / (static_cast<double>(r.completion_ms) / 1000.0)
                            : 0.0;
    std::stable_sort(all_events.begin(), all_events.end(),
                     [](const BatchEvent& a, const BatchEvent& b) {
                         return a.compute_end < b.compute_end;
                     });
    r.throughput_series = throughput_series_from_events(all_events, r.completion_ms);
    std::vector<DurationMs> latencies;
    latencies.reserve(all_events.size());
    for (const auto& e : all_events) latencies.push_back(e.compute_end - e.sealed_at);
    r.batch_latency = digest_latencies(std::move(latencies));

    r.slow_count = out.slow_count;
    r.fast_count = out.fast_count;
    const std::int64_t classified = r.slow_count + r.fast_count;
    r.slow_rate = classified > 0
                      ? static_cast<double>(r.slow_count) / static_cast<double>(classified)
                      : 0.0;
    r.scheduler_trace = std::move(out.scheduler_trace);
    r.final_workers = out.final_workers;
    r.queue_occupancy = std::move(out.queue_occupancy);

    // Exactly-once audit: consumed ids must be a permutation of generated ids.
    r.generated = n_generated;
    r.consumed = static_cast<std::int64_t>(consumed_ids.size());
    std::sort(consumed_ids.begin(), consumed_ids.end());
    r.duplicate_ids = 0;
    for (std::size_t i = 1; i < consumed_ids.size(); ++i) {
        if (consumed_ids[i] == consumed_ids[i - 1]) ++r.duplicate_ids;
    }
    bool all_present = r.consumed == n_generated && r.duplicate_ids == 0;
    if (all_present) {
        for (std::size_t i = 0; i < consumed_ids.size(); ++i) {
            if (consumed_ids[i] != i) {
                all_present = false;
                break;
            }
        }
    }
    r.exactly_once = all_present;

    if (!cfg.out_dir.empty()) write_report_files(r, cfg.out_dir);
    return r;
}

void write_report_files(const MetricsReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir + "/report.json");
        f << report.to_json_string();
    }
    {
        std::ofstream f(dir + "/throughput.csv");
        report.write_throughput_csv(f);
    }
    {
        std::ofstream f(dir + "/scheduler_trace.csv");
        report.write_scheduler_trace_csv(f);
    }
    {
        std::ofstream f(dir + "/queue_occupancy.csv");
        report.write_queue_occupancy_csv(f);
    }
}

std::vector<ComparisonRow> compare(const std::vector<MetricsReport>& reports) {
    if (reports.size() < 2) throw std::invalid_argument("compare needs >= 2 reports");
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].workload != reports[0].workload ||
            reports[i].seed != reports[0].seed ||
            reports[i].n_samples != reports[0].n_samples) {
            throw std::invalid_argument(
                "compare: mismatched experiments (report " + std::to_string(i) + " is " +
                reports[i].workload + "/seed " + std::to_string(reports[i].seed) +
                ", expected " + reports[0].workload + "/seed " +
                std::to_string(reports[0].seed) + ")");
        }
    }
    TimeMs slowest = 0;
    for (const auto& r : reports) slowest = std::max(slowest, r.completion_ms);

    auto idle_fraction = [](const MetricsReport& r) {
        double busy = 0, span = 0;
        for (const auto& c : r.consumers) {
            busy += static_cast<double>(c.busy_ms);
            span += static_cast<double>(c.span_ms);
        }
        return span > 0 ? 1.0 - busy / span : 0.0;
    };
    double slowest_idle = 0;
    for (const auto& r : reports) {
        if (r.completion_ms == slowest) slowest_idle = idle_fraction(r);
    }

    std::vector<ComparisonRow> rows;
    for (const auto& r : reports) {
        ComparisonRow row;
        row.loader = r.loader;
        row.completion_ms = r.completion_ms;
        row.speedup_vs_slowest = r.completion_ms > 0
                                     ? static_cast<double>(slowest) /
                                           static_cast<double>(r.completion_ms)
                                     : 0.0;
        row.idle_fraction = idle_fraction(r);
        row.idle_delta_vs_slowest = row.idle_fraction - slowest_idle;
        row.avg_throughput_mbps = r.avg_throughput_mbps;
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        return a.completion_ms < b.completion_ms;
    });
    return rows;
}

std::string comparison_table(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "loader" << std::right << std::setw(14)
        << "completion_ms" << std::setw(10) << "speedup" << std::setw(12) << "idle_frac"
        << std::setw(12) << "d_idle" << std::setw(12) << "mb_per_s" << "\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(14) << r.loader << std::right << std::setw(14)
            << r.completion_ms << std::setw(10) << std::fixed << std::setprecision(2)
            << r.speedup_vs_slowest << std::setw(12) << std::setprecision(3)
            << r.idle_fraction << std::setw(12) << r.idle_delta_vs_slowest << std::setw(12)
            << std::setprecision(2) << r.avg_throughput_mbps << "\n";
    }
    return out.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    out << "loader,completion_ms,speedup_vs_slowest,idle_fraction,idle_delta,mb_per_s\n";
    for (const auto& r : rows) {
        out << r.loader << "," << r.completion_ms << "," << r.speedup_vs_slowest << ","
            << r.idle_fraction << "," << r.idle_delta_vs_slowest << ","
            << r.avg_throughput_mbps << "\n";
    }
    return out.str();
}

} // namespace loadflow
