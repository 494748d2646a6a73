#include "intreg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include "intreg/constant.hpp"
#include "intreg/gbm_aft.hpp"
#include "intreg/linear.hpp"
#include "intreg/loss.hpp"
#include "intreg/mlp.hpp"
#include "intreg/mmif.hpp"
#include "intreg/mmit.hpp"
#include "intreg/rng.hpp"

namespace intreg {

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {"constant", "knn",  "linear", "mmit",
                                                   "mmif",     "mlp",  "gbm_aft"};
    return names;
}

TrainFn make_trainer(const std::string& name, const ModelOptions& options) {
    if (name == "constant")
        return [](const Dataset& train, std::uint64_t) { return train_constant(train); };
    if (name == "knn")
        return [](const Dataset& train, std::uint64_t seed) {
            return knn_cv_select(train, seed);
        };
    if (name == "linear")
        return [](const Dataset& train, std::uint64_t seed) {
            return fit_linear_path_cv(train, seed);
        };
    if (name == "mmit")
        return [fast = options.fast](const Dataset& train, std::uint64_t seed) {
            return mmit_cv_select(train, seed, fast ? MmitGrid::fast() : MmitGrid::full());
        };
    if (name == "mmif")
        return [fast = options.fast](const Dataset& train, std::uint64_t seed) {
            return train_mmif(train, seed, fast ? MmifConfig::fast() : MmifConfig{});
        };
    if (name == "mlp")
        return [fast = options.fast](const Dataset& train, std::uint64_t seed) {
            return mlp_cv_select(train, seed, fast ? MlpGrid::fast() : MlpGrid::full());
        };
    if (name == "gbm_aft")
        return [options](const Dataset& train, std::uint64_t seed) {
            GbmCvOptions cv;
            cv.exhaustive = options.exhaustive_aft_grid;
            cv.sample_cells = options.fast ? 40 : 200;
            cv.clamp_left_censored = options.clamp_left_censored;
            return gbm_cv_select(train, seed, {}, cv);
        };
    throw std::invalid_argument("unknown model: " + name);
}

nlohmann::json FoldReport::to_json() const {
    nlohmann::json j{{"schema", kFoldReportSchema},
                     {"dataset", dataset},
                     {"model", model},
                     {"fold", fold},
                     {"train_seconds", train_seconds},
                     {"selected_hyperparams", selected_hyperparams}};
    if (failed()) {
        j["error"] = error;
        j["test_error"] = nullptr;
    } else {
        j["test_error"] = test_error;
    }
    return j;
}

FoldReport FoldReport::from_json(const nlohmann::json& j) {
    FoldReport r;
    r.dataset = j.at("dataset");
    r.model = j.at("model");
    r.fold = j.at("fold");
    r.train_seconds = j.at("train_seconds");
    r.selected_hyperparams = j.at("selected_hyperparams");
    if (j.contains("error") && !j["error"].is_null()) {
        r.error = j["error"];
        r.test_error = std::numeric_limits<double>::quiet_NaN();
    } else {
        r.test_error = j.at("test_error");
    }
    return r;
}

FoldReport run_cell(const Dataset& data, const std::string& model,
                    const FoldAssignment& folds, int fold, std::uint64_t seed,
                    const BenchOptions& options, CellTrace* trace) {
    FoldReport report;
    report.dataset = data.name();
    report.model = model;
    report.fold = fold;
    report.selected_hyperparams = nlohmann::json::object();
    try {
        auto train_idx = folds.complement_indices(fold);
        auto test_idx = folds.fold_indices(fold);
        Dataset train = data.subset_rows(train_idx);
        Dataset test = data.subset_rows(test_idx);

        if (data.access_log()) data.access_log()->clear();
        TrainFn trainer = make_trainer(model, options.model_options);
        auto t0 = std::chrono::steady_clock::now();
        auto regressor = trainer(train, seed);
        auto t1 = std::chrono::steady_clock::now();
        if (trace && data.access_log())
            trace->rows_touched_during_training = data.access_log()->touched();

        auto preds = predict_all(*regressor, test);
        report.test_error = mean_squared_hinge_error(preds, test.targets());
        if (options.record_timing)
            report.train_seconds = std::chrono::duration<double>(t1 - t0).count();
        report.selected_hyperparams = regressor->hyperparams();
    } catch (const std::exception& e) {
        report.error = e.what();
        report.test_error = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

std::vector<FoldReport> run_benchmark(const std::vector<Dataset>& datasets,
                                      const std::vector<std::string>& models,
                                      std::uint64_t seed, const BenchOptions& options) {
    struct Cell {
        std::size_t dataset;
        std::size_t model;
        int fold;
    };
    std::vector<Cell> cells;
    std::vector<FoldAssignment> folds;
    folds.reserve(datasets.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        folds.push_back(make_folds(datasets[d].n_rows(), options.folds,
                                   mix_seed(seed, hash_string(datasets[d].name()))));
        for (std::size_t m = 0; m < models.size(); ++m)
            for (int f = 0; f < options.folds; ++f) cells.push_back({d, m, f});
    }

    std::vector<FoldReport> reports(cells.size());
    auto run_one = [&](std::size_t i) {
        const Cell& c = cells[i];
        std::uint64_t cell_seed =
            mix_seed(mix_seed(seed, hash_string(datasets[c.dataset].name())),
                     mix_seed(hash_string(models[c.model]), static_cast<std::uint64_t>(c.fold)));
        reports[i] = run_cell(datasets[c.dataset], models[c.model], folds[c.dataset], c.fold,
                              cell_seed, options);
    };

    int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size();
                     i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& t : workers) t.join();
    }
    return reports;
}

std::vector<SummaryRow> aggregate_and_rank(const std::vector<FoldReport>& reports) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
    for (const auto& r : reports)
        if (!r.failed()) cells[{r.dataset, r.model}].push_back(r.test_error);

    std::map<std::string, std::vector<SummaryRow>> by_dataset;
    for (const auto& [key, errors] : cells) {
        SummaryRow row;
        row.dataset = key.first;
        row.model = key.second;
        double sum = 0.0;
        for (double e : errors) sum += e;
        row.mean = sum / static_cast<double>(errors.size());
        double ss = 0.0;
        for (double e : errors) ss += (e - row.mean) * (e - row.mean);
        row.stddev = errors.size() > 1
                         ? std::sqrt(ss / static_cast<double>(errors.size() - 1))
                         : 0.0;
        by_dataset[row.dataset].push_back(row);
    }

    std::vector<SummaryRow> out;
    for (auto& [dataset, rows] : by_dataset) {
        auto rank_by = [&rows](auto key, auto assign) {
            std::vector<std::size_t> order(rows.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (key(rows[a]) != key(rows[b])) return key(rows[a]) < key(rows[b]);
                return rows[a].model < rows[b].model;
            });
            for (std::size_t i = 0; i < order.size(); ++i)
                assign(rows[order[i]], static_cast<int>(i) + 1);
        };
        rank_by([](const SummaryRow& r) { return r.mean; },
                [](SummaryRow& r, int rank) { r.perf_rank = rank; });
        rank_by([](const SummaryRow& r) { return r.stddev; },
                [](SummaryRow& r, int rank) { r.cons_rank = rank; });
        std::sort(rows.begin(), rows.end(),
                  [](const SummaryRow& a, const SummaryRow& b) { return a.model < b.model; });
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

void write_jsonl(const std::vector<FoldReport>& reports, std::ostream& out) {
    for (const auto& r : reports) out << r.to_json().dump() << '\n';
}

std::vector<FoldReport> read_jsonl(std::istream& in) {
    std::vector<FoldReport> reports;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        reports.push_back(FoldReport::from_json(nlohmann::json::parse(line)));
    }
    return reports;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
    out << "dataset,model,mean,std,perf_rank,cons_rank\n";
    for (const auto& r : rows)
        out << r.dataset << ',' << r.model << ',' << format_double(r.mean) << ','
            << format_double(r.stddev) << ',' << r.perf_rank << ',' << r.cons_rank << '\n';
}

void write_plot_data_csv(const std::vector<FoldReport>& reports, bool log_scale,
                         std::ostream& out) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
    for (const auto& r : reports) {
        if (r.failed()) continue;
        double e = r.test_error;
        if (log_scale) e = std::log(std::max(e, 1e-300));
        cells[{r.dataset, r.model}].push_back(e);
    }
    out << "dataset,model,mean,std\n";
    for (const auto& [key, errors] : cells) {
        double sum = 0.0;
        for (double e : errors) sum += e;
        double mean = sum / static_cast<double>(errors.size());
        double ss = 0.0;
        for (double e : errors) ss += (e - mean) * (e - mean);
        double sd = errors.size() > 1 ? std::sqrt(ss / static_cast<double>(errors.size() - 1))
                                      : 0.0;
        out << key.first << ',' << key.second << ',' << format_double(mean) << ','
            << format_double(sd) << '\n';
    }
}

}  // namespace intreg
