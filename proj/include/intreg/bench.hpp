#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "intreg/dataset.hpp"
#include "intreg/regressor.hpp"
#include "json.hpp"

namespace intreg {

// Flags shared by all model trainers; mirrors the CLI surface.
struct ModelOptions {
    bool fast = false;                 // shrunken CV grids, documented in the README
    bool exhaustive_aft_grid = false;  // full AFT boosting grid instead of sampling
    std::optional<double> clamp_left_censored;
};

using TrainFn =
    std::function<std::unique_ptr<Regressor>(const Dataset& train, std::uint64_t seed)>;

// The seven model names: constant, knn, linear, mmit, mmif, mlp, gbm_aft.
const std::vector<std::string>& model_names();
TrainFn make_trainer(const std::string& name, const ModelOptions& options);

inline constexpr char kFoldReportSchema[] = "intreg-foldreport-v1";

struct FoldReport {
    std::string dataset;
    std::string model;
    int fold = 0;
    double test_error = 0.0;  // NaN when the cell failed
    double train_seconds = 0.0;
    nlohmann::json selected_hyperparams;
    std::string error;  // empty when the cell succeeded

    bool failed() const { return !error.empty(); }

    nlohmann::json to_json() const;
    static FoldReport from_json(const nlohmann::json& j);
};

struct BenchOptions {
    int folds = 5;
    int jobs = 1;
    bool record_timing = false;  // off by default so reruns are byte-identical
    ModelOptions model_options;
};

// Training-time row accesses of one cell, from the dataset's access log.
struct CellTrace {
    std::vector<std::uint32_t> rows_touched_during_training;
};

FoldReport run_cell(const Dataset& data, const std::string& model,
                    const FoldAssignment& folds, int fold, std::uint64_t seed,
                    const BenchOptions& options, CellTrace* trace = nullptr);

// Folds are fixed per dataset (every model sees identical splits); cells are
// independent jobs, assembled in deterministic (dataset, model, fold) order.
std::vector<FoldReport> run_benchmark(const std::vector<Dataset>& datasets,
                                      const std::vector<std::string>& models,
                                      std::uint64_t seed, const BenchOptions& options);

struct SummaryRow {
    std::string dataset;
    std::string model;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1) standard deviation
    int perf_rank = 0;    // ascending by mean, ties by model name
    int cons_rank = 0;    // ascending by stddev, ties by model name
};

std::vector<SummaryRow> aggregate_and_rank(const std::vector<FoldReport>& reports);

void write_jsonl(const std::vector<FoldReport>& reports, std::ostream& out);
std::vector<FoldReport> read_jsonl(std::istream& in);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);

// Tidy per-(dataset, model) mean/std of fold errors, optionally of the log of
// the errors (the transform is applied at render time only).
void write_plot_data_csv(const std::vector<FoldReport>& reports, bool log_scale,
                         std::ostream& out);

}  // namespace intreg
