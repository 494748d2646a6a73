#include "intreg/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "intreg/rng.hpp"

namespace intreg {

Dataset::Dataset(std::string name, std::vector<double> features, std::size_t n_rows,
                 std::size_t n_cols, std::vector<std::string> feature_names,
                 std::vector<IntervalTarget> targets)
    : name_(std::move(name)),
      n_(n_rows),
      m_(n_cols),
      features_(std::move(features)),
      feature_names_(std::move(feature_names)),
      targets_(std::move(targets)) {
    if (n_ < 1 || m_ < 1) throw std::invalid_argument("Dataset: empty");
    if (features_.size() != n_ * m_) throw std::invalid_argument("Dataset: feature size mismatch");
    if (feature_names_.size() != m_) throw std::invalid_argument("Dataset: name count mismatch");
    if (targets_.size() != n_) throw std::invalid_argument("Dataset: target count mismatch");
    for (double v : features_)
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite feature");
    origin_rows_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) origin_rows_[i] = static_cast<std::uint32_t>(i);
}

Dataset Dataset::subset_rows(std::span<const std::size_t> rows) const {
    std::vector<std::size_t> all_cols(m_);
    for (std::size_t j = 0; j < m_; ++j) all_cols[j] = j;
    return subset(rows, all_cols);
}

Dataset Dataset::subset(std::span<const std::size_t> rows,
                        std::span<const std::size_t> cols) const {
    std::vector<double> feats;
    feats.reserve(rows.size() * cols.size());
    std::vector<IntervalTarget> tg;
    tg.reserve(rows.size());
    std::vector<std::string> names;
    names.reserve(cols.size());
    for (std::size_t c : cols) names.push_back(feature_names_[c]);
    for (std::size_t r : rows) {
        // direct access, subsetting itself is not a model read
        for (std::size_t c : cols) feats.push_back(features_[r * m_ + c]);
        tg.push_back(targets_[r]);
    }
    Dataset out(name_, std::move(feats), rows.size(), cols.size(), std::move(names),
                std::move(tg));
    out.access_log_ = access_log_;
    for (std::size_t i = 0; i < rows.size(); ++i) out.origin_rows_[i] = origin_rows_[rows[i]];
    return out;
}

Dataset Dataset::with_name(std::string name) const {
    Dataset out = *this;
    out.name_ = std::move(name);
    return out;
}

Dataset Dataset::with_targets(std::vector<IntervalTarget> targets) const {
    if (targets.size() != n_) throw std::invalid_argument("with_targets: count mismatch");
    Dataset out = *this;
    out.targets_ = std::move(targets);
    return out;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool iequals(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

double parse_real(const std::string& cell, std::size_t row, bool allow_inf) {
    std::string t = trim(cell);
    if (allow_inf) {
        if (iequals(t, "inf") || iequals(t, "+inf")) return IntervalTarget::inf();
        if (iequals(t, "-inf")) return -IntervalTarget::inf();
    }
    double v;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
        throw std::runtime_error("csv row " + std::to_string(row) + ": unparseable cell '" +
                                 cell + "'");
    return v;
}

}  // namespace

Dataset load_csv(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
    auto header = split_csv_line(line);
    if (header.size() < 3)
        throw std::runtime_error("csv: need at least one feature column plus y_low,y_high");
    if (trim(header[header.size() - 2]) != "y_low" || trim(header.back()) != "y_high")
        throw std::runtime_error("csv: last two columns must be y_low,y_high");
    const std::size_t m = header.size() - 2;
    std::vector<std::string> names(header.begin(), header.begin() + m);

    std::vector<double> feats;
    std::vector<IntervalTarget> targets;
    std::size_t row = 1;  // header is row 0
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("csv row " + std::to_string(row) + ": expected " +
                                     std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
        for (std::size_t j = 0; j < m; ++j) feats.push_back(parse_real(cells[j], row, false));
        std::string lo = trim(cells[m]), hi = trim(cells[m + 1]);
        double y_low = lo.empty() ? -IntervalTarget::inf() : parse_real(lo, row, true);
        double y_high = hi.empty() ? IntervalTarget::inf() : parse_real(hi, row, true);
        try {
            targets.emplace_back(y_low, y_high);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("csv row " + std::to_string(row) + ": " + e.what());
        }
        ++row;
    }
    if (targets.empty()) throw std::runtime_error("csv: no data rows");
    const std::size_t n = targets.size();
    return Dataset(name, std::move(feats), n, m, std::move(names), std::move(targets));
}

Dataset load_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string name = path;
    if (auto pos = name.find_last_of('/'); pos != std::string::npos) name = name.substr(pos + 1);
    if (name.size() > 4 && name.ends_with(".csv")) name = name.substr(0, name.size() - 4);
    return load_csv(in, name);
}

void save_csv(const Dataset& data, std::ostream& out) {
    for (const auto& n : data.feature_names()) out << n << ',';
    out << "y_low,y_high\n";
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        auto x = data.row(i);
        for (double v : x) out << format_double(v) << ',';
        out << format_double(data.target(i).lower()) << ','
            << format_double(data.target(i).upper()) << '\n';
    }
}

void save_csv_file(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_csv(data, out);
}

void FeatureStats::apply(std::span<const double> x, std::span<double> out) const {
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = stddev[j] > 0 ? (x[j] - mean[j]) / stddev[j] : 0.0;
}

FeatureStats compute_feature_stats(const Dataset& data) {
    const std::size_t n = data.n_rows(), m = data.n_cols();
    FeatureStats st;
    st.mean.assign(m, 0.0);
    st.stddev.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = data.row(i);
        for (std::size_t j = 0; j < m; ++j) st.mean[j] += x[j];
    }
    for (double& v : st.mean) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = data.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            double d = x[j] - st.mean[j];
            st.stddev[j] += d * d;
        }
    }
    for (double& v : st.stddev) v = std::sqrt(v / static_cast<double>(n));
    return st;
}

Dataset normalize_with(const Dataset& data, const FeatureStats& stats) {
    const std::size_t n = data.n_rows(), m = data.n_cols();
    std::vector<double> feats(n * m);
    for (std::size_t i = 0; i < n; ++i)
        stats.apply(data.row(i), {feats.data() + i * m, m});
    Dataset out(data.name(), std::move(feats), n, m, data.feature_names(),
                data.targets());
    return out;
}

NormalizedPair normalize_train_test(const Dataset& train, const Dataset& test) {
    if (train.n_cols() != test.n_cols())
        throw std::invalid_argument("normalize_train_test: column count mismatch");
    FeatureStats st = compute_feature_stats(train);
    return {normalize_with(train, st), normalize_with(test, st), std::move(st)};
}

std::vector<std::size_t> FoldAssignment::fold_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldAssignment::complement_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] != fold) out.push_back(i);
    return out;
}

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_folds: k must be >= 2");
    if (n < static_cast<std::size_t>(k)) throw std::invalid_argument("make_folds: n < k");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);
    FoldAssignment fa;
    fa.k = k;
    fa.fold_of.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) fa.fold_of[perm[i]] = static_cast<int>(i % k);
    return fa;
}

SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "linear") return SynthKind::linear;
    if (s == "sin") return SynthKind::sin;
    if (s == "abs") return SynthKind::abs;
    throw std::invalid_argument("unknown synthetic kind: " + s);
}

const char* to_string(SynthKind k) {
    switch (k) {
        case SynthKind::linear: return "linear";
        case SynthKind::sin: return "sin";
        case SynthKind::abs: return "abs";
    }
    return "?";
}

std::size_t synthetic_signal_column(const SynthSpec& spec) {
    Rng rng(mix_seed(spec.seed, 0x5167));
    return static_cast<std::size_t>(rng.below(spec.n_features));
}

Dataset generate_synthetic(const SynthSpec& spec) {
    if (spec.n_features < 1 || spec.n_instances < 1)
        throw std::invalid_argument("generate_synthetic: empty spec");
    const std::size_t n = spec.n_instances, m = spec.n_features;
    const std::size_t signal = synthetic_signal_column(spec);

    Rng rng(mix_seed(spec.seed, 0xda7a));
    std::vector<double> feats(n * m);
    std::vector<double> lowers(n), uppers(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) feats[i * m + j] = rng.uniform(-10.0, 10.0);
        double x = feats[i * m + signal];
        double f;
        switch (spec.kind) {
            case SynthKind::linear: f = x; break;
            case SynthKind::sin: f = std::sin(x); break;
            case SynthKind::abs: f = std::abs(x); break;
            default: f = x;
        }
        double w = 0.1 + std::abs(rng.normal(0.0, 0.3));
        double y_l = f - w, y_u = f + w;
        double shift = rng.normal(0.0, std::abs(y_l) / 10.0);
        lowers[i] = y_l + shift;
        uppers[i] = y_u + shift;
    }

    // disjoint 20% right-censored / 20% left-censored
    Rng crng(mix_seed(spec.seed, 0xce45));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    crng.shuffle(order);
    std::size_t n_cens = n / 5;
    for (std::size_t i = 0; i < n_cens; ++i) uppers[order[i]] = IntervalTarget::inf();
    for (std::size_t i = n_cens; i < 2 * n_cens; ++i) lowers[order[i]] = -IntervalTarget::inf();

    std::vector<IntervalTarget> targets;
    targets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) targets.emplace_back(lowers[i], uppers[i]);

    std::vector<std::string> names(m);
    for (std::size_t j = 0; j < m; ++j) names[j] = "f" + std::to_string(j + 1);
    std::string name = std::string("simulated.") + to_string(spec.kind);
    return Dataset(std::move(name), std::move(feats), n, m, std::move(names),
                   std::move(targets));
}

}  // namespace intreg
