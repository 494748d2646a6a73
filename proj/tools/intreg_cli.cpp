#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "intreg/bench.hpp"
#include "intreg/constant.hpp"
#include "intreg/dataset.hpp"
#include "intreg/loss.hpp"
#include "intreg/rng.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 20250101;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("INTREG_SEED")) return std::strtoull(env, nullptr, 10);
    return kDefaultSeed;
}

int count_failures(const std::vector<intreg::FoldReport>& reports, bool verbose) {
    int failures = 0;
    for (const auto& r : reports) {
        if (r.failed()) {
            ++failures;
            if (verbose)
                std::cerr << "FAILED cell " << r.dataset << '/' << r.model << "/fold" << r.fold
                          << ": " << r.error << '\n';
        }
    }
    return failures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interval regression toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
    std::string synth_kind = "linear", synth_out = "synthetic.csv";
    std::size_t synth_n = 200, synth_m = 20;
    std::uint64_t synth_seed = default_seed();
    synth->add_option("--kind", synth_kind, "linear, sin or abs")->required();
    synth->add_option("--n", synth_n, "instances (default 200)");
    synth->add_option("--m", synth_m, "features (default 20)");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("-o,--out", synth_out, "output CSV path")->required();

    // run
    auto* run = app.add_subcommand("run", "run one (model, dataset) benchmark row");
    std::string run_model, run_data;
    std::uint64_t run_seed = default_seed();
    bool run_fast = false, run_exhaustive = false;
    double run_clamp = 0.0;
    run->add_option("--model", run_model, "model name")->required();
    run->add_option("--data", run_data, "dataset CSV path")->required();
    run->add_option("--seed", run_seed, "master seed");
    run->add_flag("--fast", run_fast, "shrunken CV grids");
    run->add_flag("--exhaustive-aft-grid", run_exhaustive, "full AFT hyperparameter grid");
    auto* run_clamp_opt =
        run->add_option("--clamp-left-censored", run_clamp,
                        "replace -inf lower bounds with this value (AFT preprocessing)");

    // bench
    auto* bench = app.add_subcommand("bench", "full benchmark over datasets and models");
    std::vector<std::string> bench_data;
    std::vector<std::string> bench_models;
    std::string bench_out = "bench_out";
    std::uint64_t bench_seed = default_seed();
    int bench_jobs = 1;
    bool bench_fast = false, bench_exhaustive = false, bench_timing = false;
    double bench_clamp = 0.0;
    bench->add_option("--data", bench_data, "dataset CSV paths")->required()->expected(-1);
    bench->add_option("--models", bench_models, "model names (default: all seven)")
        ->expected(-1);
    bench->add_option("--out", bench_out, "output directory");
    bench->add_option("--seed", bench_seed, "master seed");
    bench->add_option("--jobs", bench_jobs, "worker threads");
    bench->add_flag("--fast", bench_fast, "shrunken CV grids");
    bench->add_flag("--exhaustive-aft-grid", bench_exhaustive, "full AFT grid");
    bench->add_flag("--timing", bench_timing,
                    "record real train times (breaks byte-identical reruns)");
    auto* bench_clamp_opt =
        bench->add_option("--clamp-left-censored", bench_clamp,
                          "replace -inf lower bounds with this value (AFT preprocessing)");

    // report
    auto* report = app.add_subcommand("report", "render summary/rank CSVs from a JSONL file");
    std::string report_in, report_out = "bench_out";
    bool report_log = false;
    report->add_option("--reports", report_in, "JSONL fold reports")->required();
    report->add_option("--out", report_out, "output directory");
    report->add_flag("--log-scale", report_log, "plot data uses log of fold errors");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            intreg::SynthSpec spec;
            spec.kind = intreg::synth_kind_from_string(synth_kind);
            spec.n_instances = synth_n;
            spec.n_features = synth_m;
            spec.seed = synth_seed;
            intreg::save_csv_file(intreg::generate_synthetic(spec), synth_out);
            std::cout << "wrote " << synth_out << '\n';
            return 0;
        }

        if (*run) {
            intreg::Dataset data = intreg::load_csv_file(run_data);
            intreg::BenchOptions options;
            options.model_options.fast = run_fast;
            options.model_options.exhaustive_aft_grid = run_exhaustive;
            if (run_clamp_opt->count() > 0)
                options.model_options.clamp_left_censored = run_clamp;
            std::vector<intreg::FoldReport> reports =
                intreg::run_benchmark({data}, {run_model}, run_seed, options);
            double sum = 0.0, sumsq = 0.0;
            int ok = 0;
            for (const auto& r : reports) {
                std::cout << "fold " << r.fold << ": ";
                if (r.failed()) {
                    std::cout << "FAILED (" << r.error << ")\n";
                    continue;
                }
                std::cout << intreg::format_double(r.test_error)
                          << "  hyperparams=" << r.selected_hyperparams.dump() << '\n';
                sum += r.test_error;
                sumsq += r.test_error * r.test_error;
                ++ok;
            }
            if (ok > 0) {
                double mean = sum / ok;
                double var = ok > 1 ? (sumsq - sum * mean) / (ok - 1) : 0.0;
                std::cout << "mean " << intreg::format_double(mean) << "  std "
                          << intreg::format_double(std::sqrt(std::max(0.0, var))) << '\n';
            }
            return count_failures(reports, true) == 0 ? 0 : 1;
        }

        if (*bench) {
            std::vector<intreg::Dataset> datasets;
            for (const auto& path : bench_data) datasets.push_back(intreg::load_csv_file(path));
            if (bench_models.empty()) bench_models = intreg::model_names();
            intreg::BenchOptions options;
            options.jobs = bench_jobs;
            options.record_timing = bench_timing;
            options.model_options.fast = bench_fast;
            options.model_options.exhaustive_aft_grid = bench_exhaustive;
            if (bench_clamp_opt->count() > 0)
                options.model_options.clamp_left_censored = bench_clamp;

            auto reports = intreg::run_benchmark(datasets, bench_models, bench_seed, options);
            std::filesystem::create_directories(bench_out);
            {
                std::ofstream jl(bench_out + "/reports.jsonl");
                intreg::write_jsonl(reports, jl);
            }
            {
                std::ofstream sc(bench_out + "/summary.csv");
                intreg::write_summary_csv(intreg::aggregate_and_rank(reports), sc);
            }
            {
                std::ofstream pd(bench_out + "/plot_data.csv");
                intreg::write_plot_data_csv(reports, false, pd);
            }
            int failures = count_failures(reports, true);
            std::cout << "wrote " << bench_out << "/reports.jsonl, summary.csv, plot_data.csv ("
                      << reports.size() - failures << '/' << reports.size() << " cells ok)\n";
            return failures == 0 ? 0 : 1;
        }

        if (*report) {
            std::ifstream in(report_in);
            if (!in) throw std::runtime_error("cannot open " + report_in);
            auto reports = intreg::read_jsonl(in);
            std::filesystem::create_directories(report_out);
            {
                std::ofstream sc(report_out + "/summary.csv");
                intreg::write_summary_csv(intreg::aggregate_and_rank(reports), sc);
            }
            {
                std::ofstream pd(report_out + "/plot_data.csv");
                intreg::write_plot_data_csv(reports, report_log, pd);
            }
            std::cout << "wrote " << report_out << "/summary.csv, plot_data.csv\n";
            return count_failures(reports, false) == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
