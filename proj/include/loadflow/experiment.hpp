#pragma once

#include <string>
#include <vector>

#include "loadflow/config.hpp"
#include "loadflow/metrics.hpp"
#include "loadflow/profiler.hpp"
#include "loadflow/scheduler.hpp"
#include "loadflow/trainer.hpp"
#include "loadflow/workloads.hpp"

namespace loadflow {

enum class LoaderKind : std::uint8_t { minato, sync, autoorder, sizeheuristic };
enum class RunMode : std::uint8_t { virtual_time, realtime };

const char* loader_name(LoaderKind k);
LoaderKind loader_from_name(const std::string& name);
const char* mode_name(RunMode m);
RunMode mode_from_name(const std::string& name);

struct ExperimentConfig {
    WorkloadSpec workload;
    LoaderKind loader = LoaderKind::minato;
    RunMode mode = RunMode::virtual_time;
    int n_consumers = 1;
    int batch_size = 24;
    std::size_t queue_capacity = 100;
    ConsumerConfig consumer;
    SchedulerConfig scheduler;
    bool scheduler_enabled = true;
    ProfilerConfig profiler;
    int sync_workers = 12;            // per-consumer workers for sync loaders
    int prefetch_factor = 2;          // sync in-flight batch window
    double size_cutoff_bytes = 150e6; // sizeheuristic classifier cutoff
    std::string out_dir;

    void validate() const;
    static ExperimentConfig from_config(const ConfigFile& cfg);
};

MetricsReport run_experiment(const ExperimentConfig& cfg);

// Writes report.json plus the CSV time series into dir.
void write_report_files(const MetricsReport& report, const std::string& dir);

struct ComparisonRow {
    std::string loader;
    TimeMs completion_ms = 0;
    double speedup_vs_slowest = 1.0;
    double idle_fraction = 0;
    double idle_delta_vs_slowest = 0;
    double avg_throughput_mbps = 0;
};

// Pre: >= 2 reports over the same workload/seed/sample count; rows come back
// sorted by completion time. Throws with a diagnostic on mismatched reports.
std::vector<ComparisonRow> compare(const std::vector<MetricsReport>& reports);

std::string comparison_table(const std::vector<ComparisonRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

} // namespace loadflow
