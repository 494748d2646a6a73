#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "intreg/interval.hpp"

namespace intreg {

// Records which original dataset rows were touched through row(); used by the
// benchmark's no-leakage instrumentation.
class RowAccessLog {
public:
    void record(std::uint32_t original_row) {
        std::lock_guard lock(mutex_);
        rows_.insert(original_row);
    }
    std::vector<std::uint32_t> touched() const {
        std::lock_guard lock(mutex_);
        return {rows_.begin(), rows_.end()};
    }
    void clear() {
        std::lock_guard lock(mutex_);
        rows_.clear();
    }

private:
    mutable std::mutex mutex_;
    std::set<std::uint32_t> rows_;
};

// Immutable feature matrix (row-major) plus one interval target per row.
class Dataset {
public:
    Dataset(std::string name, std::vector<double> features, std::size_t n_rows,
            std::size_t n_cols, std::vector<std::string> feature_names,
            std::vector<IntervalTarget> targets);

    const std::string& name() const { return name_; }
    std::size_t n_rows() const { return n_; }
    std::size_t n_cols() const { return m_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<IntervalTarget>& targets() const { return targets_; }
    const IntervalTarget& target(std::size_t i) const { return targets_[i]; }

    std::span<const double> row(std::size_t i) const {
        if (access_log_) access_log_->record(origin_rows_[i]);
        return {features_.data() + i * m_, m_};
    }

    double at(std::size_t i, std::size_t j) const { return row(i)[j]; }

    // New dataset holding the given rows; access log and row origins carry over.
    Dataset subset_rows(std::span<const std::size_t> rows) const;
    // New dataset holding the given rows restricted to the given columns.
    Dataset subset(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;

    Dataset with_name(std::string name) const;
    Dataset with_targets(std::vector<IntervalTarget> targets) const;

    void attach_access_log(std::shared_ptr<RowAccessLog> log) { access_log_ = std::move(log); }
    const std::shared_ptr<RowAccessLog>& access_log() const { return access_log_; }
    std::uint32_t origin_row(std::size_t i) const { return origin_rows_[i]; }

private:
    std::string name_;
    std::size_t n_, m_;
    std::vector<double> features_;
    std::vector<std::string> feature_names_;
    std::vector<IntervalTarget> targets_;
    std::vector<std::uint32_t> origin_rows_;
    std::shared_ptr<RowAccessLog> access_log_;
};

// CSV format: UTF-8, comma-separated, header row; feature columns followed by
// exactly y_low,y_high. Infinities are case-insensitive "inf"/"-inf"; an empty
// y_low means -inf and an empty y_high means +inf.
Dataset load_csv(std::istream& in, const std::string& name);
Dataset load_csv_file(const std::string& path);
void save_csv(const Dataset& data, std::ostream& out);
void save_csv_file(const Dataset& data, const std::string& path);

// Shortest round-trip decimal rendering of a double (shared by CSV/JSONL writers).
std::string format_double(double v);

struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population std; 0 marks a zero-variance column

    // Normalize one raw feature row in place into out.
    void apply(std::span<const double> x, std::span<double> out) const;
};

FeatureStats compute_feature_stats(const Dataset& data);
Dataset normalize_with(const Dataset& data, const FeatureStats& stats);

struct NormalizedPair {
    Dataset train;
    Dataset test;
    FeatureStats stats;
};

// Train columns end up mean 0 / std 1 (population std); test reuses the train
// statistics; zero-variance columns map to all zeros.
NormalizedPair normalize_train_test(const Dataset& train, const Dataset& test);

struct FoldAssignment {
    std::vector<int> fold_of;  // n entries in [0, k)
    int k = 0;

    std::vector<std::size_t> fold_indices(int fold) const;
    std::vector<std::size_t> complement_indices(int fold) const;
};

// Seeded uniform shuffle of 0..n-1 assigned round-robin to k folds; fold sizes
// differ by at most 1. Throws if n < k or k < 2.
FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed);

enum class SynthKind { linear, sin, abs };

SynthKind synth_kind_from_string(const std::string& s);
const char* to_string(SynthKind k);

struct SynthSpec {
    SynthKind kind = SynthKind::linear;
    std::size_t n_instances = 200;
    std::size_t n_features = 20;
    std::uint64_t seed = 0;
};

// Synthetic interval-regression data: features i.i.d. uniform on [-10, 10],
// one seeded-random signal column, latent output f(x) in {x, sin x, |x|},
// symmetric interval of half-width 0.1 + |N(0, 0.3)|, a per-instance shift of
// N(0, (|y_l|/10)^2) added to both bounds, then a seeded 20% of instances made
// right-censored and a disjoint 20% left-censored.
Dataset generate_synthetic(const SynthSpec& spec);

// Index of the signal column for a given spec (same seeded draw the generator
// uses); exposed for tests that check signal recoverability.
std::size_t synthetic_signal_column(const SynthSpec& spec);

}  // namespace intreg
