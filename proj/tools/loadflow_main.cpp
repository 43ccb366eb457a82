// loadflow CLI: run pipeline experiments, compare reports, and export
// synthetic workload streams.
//
//   loadflow run --config cfg [--loader L] [--mode virtual|realtime]
//                [--seed N] [--out dir]
//   loadflow compare report.json report2.json ... [--csv out.csv]
//   loadflow gen-workload --spec speech_3s --out stream.csv [--n N] [--seed S]
//
// Set LOADFLOW_LOG=debug for progress logging on stderr.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loadflow/experiment.hpp"
#include "loadflow/workloads.hpp"

namespace {

bool log_enabled() {
    const char* v = std::getenv("LOADFLOW_LOG");
    return v != nullptr && std::string(v) != "quiet" && std::string(v) != "0";
}

void log_line(const std::string& msg) {
    if (log_enabled()) std::cerr << "[loadflow] " << msg << "\n";
}

int cmd_run(const std::string& config_path, const std::string& loader,
            const std::string& mode, std::int64_t seed, const std::string& out_dir) {
    auto file = loadflow::ConfigFile::parse_file(config_path);
    if (!loader.empty()) file.set("pipeline.loader", loader);
    if (!mode.empty()) file.set("run.mode", mode);
    if (seed >= 0) file.set("workload.seed", std::to_string(seed));
    if (!out_dir.empty()) file.set("run.out_dir", out_dir);

    auto cfg = loadflow::ExperimentConfig::from_config(file);
    log_line("running " + std::string(loadflow::loader_name(cfg.loader)) + " on " +
             loadflow::workload_name(cfg.workload.kind) + " (" +
             loadflow::mode_name(cfg.mode) + ")");
    auto report = loadflow::run_experiment(cfg);

    std::cout << "workload=" << report.workload << " loader=" << report.loader
              << " completion_ms=" << report.completion_ms
              << " throughput_mbps=" << report.avg_throughput_mbps
              << " slow_rate=" << report.slow_rate
              << " exactly_once=" << (report.exactly_once ? "yes" : "no") << "\n";
    if (!cfg.out_dir.empty()) {
        std::cout << "report written to " << cfg.out_dir << "/report.json\n";
    }
    if (report.partial) {
        std::cerr << "warning: partial metrics (realtime run aborted early)\n";
        return 2;
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& csv_out) {
    std::vector<loadflow::MetricsReport> reports;
    for (const auto& p : paths) {
        std::ifstream in(p);
        if (!in) throw std::runtime_error("cannot open report: " + p);
        std::stringstream ss;
        ss << in.rdbuf();
        reports.push_back(loadflow::MetricsReport::from_json_string(ss.str()));
    }
    auto rows = loadflow::compare(reports);
    std::cout << loadflow::comparison_table(rows);
    if (!csv_out.empty()) {
        std::ofstream f(csv_out);
        f << loadflow::comparison_csv(rows);
        std::cout << "comparison csv written to " << csv_out << "\n";
    }
    return 0;
}

int cmd_gen_workload(const std::string& spec_name, const std::string& out_path,
                     std::int64_t n, std::int64_t seed) {
    auto kind = loadflow::workload_from_name(spec_name);
    auto spec = loadflow::default_spec(kind, n, static_cast<std::uint64_t>(seed));
    auto stream = loadflow::generate(spec);
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot open output: " + out_path);
    loadflow::export_stream_csv(stream, f);
    std::cout << "wrote " << stream.samples.size() << " samples to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"head-of-line-blocking-free data pipeline benchmark"};
    app.require_subcommand(1);

    std::string config_path, loader, mode, out_dir;
    std::int64_t seed = -1;
    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("--config", config_path, "experiment config path")->required();
    run->add_option("--loader", loader, "minato|sync|autoorder|sizeheuristic");
    run->add_option("--mode", mode, "virtual|realtime");
    run->add_option("--seed", seed, "workload seed override");
    run->add_option("--out", out_dir, "output directory for report files");

    std::vector<std::string> report_paths;
    std::string csv_out;
    auto* cmp = app.add_subcommand("compare", "compare experiment reports");
    cmp->add_option("reports", report_paths, "report.json paths")->expected(-2);
    cmp->add_option("--csv", csv_out, "also write the comparison as CSV");

    std::string spec_name, gen_out;
    std::int64_t gen_n = 1000, gen_seed = 1;
    auto* gen = app.add_subcommand("gen-workload", "export a synthetic sample stream");
    gen->add_option("--spec", spec_name, "img_seg|obj_det|speech_3s|speech_10s")->required();
    gen->add_option("--out", gen_out, "output CSV path")->required();
    gen->add_option("--n", gen_n, "number of samples");
    gen->add_option("--seed", gen_seed, "stream seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, loader, mode, seed, out_dir);
        if (cmp->parsed()) return cmd_compare(report_paths, csv_out);
        if (gen->parsed()) return cmd_gen_workload(spec_name, gen_out, gen_n, gen_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
