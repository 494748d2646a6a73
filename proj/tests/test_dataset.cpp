#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "intreg/dataset.hpp"
#include "intreg/rng.hpp"

using namespace intreg;

namespace {

Dataset tiny() {
    const double inf = IntervalTarget::inf();
    return Dataset("tiny", {1.0, 2.0, 3.5, -4.25, 0.125, 9.0}, 3, 2, {"a", "b"},
                   {{0.5, 1.5}, {2.0, inf}, {-inf, -3.0}});
}

}  // namespace

TEST_CASE("csv round trip preserves features and targets exactly") {
    Dataset d = tiny();
    std::stringstream buf;
    save_csv(d, buf);
    Dataset back = load_csv(buf, "tiny");
    REQUIRE(back.n_rows() == d.n_rows());
    REQUIRE(back.n_cols() == d.n_cols());
    CHECK(back.feature_names() == d.feature_names());
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
        for (std::size_t j = 0; j < d.n_cols(); ++j) CHECK(back.at(i, j) == d.at(i, j));
        CHECK(back.target(i) == d.target(i));
    }
}

TEST_CASE("csv empty target cells mean open bounds") {
    std::stringstream in("x,y_low,y_high\n1,,-3\n2,4,\n3,,\n");
    Dataset d = load_csv(in, "open");
    CHECK(d.target(0).kind() == Censoring::left_censored);
    CHECK(d.target(1).kind() == Censoring::right_censored);
    CHECK(d.target(1).lower() == 4.0);
    CHECK(!d.target(2).finite_lower());
    CHECK(!d.target(2).finite_upper());
}

TEST_CASE("csv infinity spellings are case-insensitive") {
    std::stringstream in("x,y_low,y_high\n1,-INF,2\n2,0,Inf\n3,-inf,INF\n");
    Dataset d = load_csv(in, "infs");
    CHECK(d.target(0).kind() == Censoring::left_censored);
    CHECK(d.target(1).kind() == Censoring::right_censored);
    CHECK(!d.target(2).finite_lower());
    CHECK(!d.target(2).finite_upper());
}

TEST_CASE("csv errors carry the offending row number") {
    {
        std::stringstream in("x,y_low,y_high\n1,0,1\nbad,0,1\n");
        CHECK_THROWS_WITH_AS(load_csv(in, "e"), doctest::Contains("row 2"),
                             std::runtime_error);
    }
    {
        std::stringstream in("x,y_low,y_high\n1,0,1\n2,0\n");
        CHECK_THROWS_WITH_AS(load_csv(in, "e"), doctest::Contains("row 2"),
                             std::runtime_error);
    }
    {
        std::stringstream in("x,y_low,y_high\n1,5,1\n");
        CHECK_THROWS_WITH_AS(load_csv(in, "e"), doctest::Contains("row 1"),
                             std::runtime_error);
    }
    {
        std::stringstream in("x,lo,hi\n1,0,1\n");
        CHECK_THROWS_AS(load_csv(in, "e"), std::runtime_error);
    }
    {
        std::stringstream in("x,y_low,y_high\n");
        CHECK_THROWS_AS(load_csv(in, "e"), std::runtime_error);
    }
}

TEST_CASE("format_double renders shortest exact round trip") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(40)) - 20);
        std::string s = format_double(v);
        double back;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(ec == std::errc{});
        REQUIRE(ptr == s.data() + s.size());
        CHECK(back == v);
    }
    CHECK(format_double(IntervalTarget::inf()) == "inf");
    CHECK(format_double(-IntervalTarget::inf()) == "-inf");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("dataset rejects non-finite features") {
    CHECK_THROWS_AS(Dataset("bad", {1.0, std::nan("")}, 2, 1, {"x"}, {{0, 1}, {0, 1}}),
                    std::invalid_argument);
}

TEST_CASE("normalization hits the known three-point answer") {
    Dataset d("n", {1.0, 5.0, 2.0, 5.0, 3.0, 5.0}, 3, 2, {"x", "c"},
              {{0, 1}, {0, 1}, {0, 1}});
    FeatureStats st = compute_feature_stats(d);
    CHECK(st.mean[0] == doctest::Approx(2.0));
    CHECK(st.stddev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(st.stddev[1] == 0.0);
    Dataset nz = normalize_with(d, st);
    CHECK(nz.at(0, 0) == doctest::Approx(-1.224744871).epsilon(1e-9));
    CHECK(nz.at(1, 0) == doctest::Approx(0.0).scale(1.0));
    CHECK(nz.at(2, 0) == doctest::Approx(1.224744871).epsilon(1e-9));
    // zero-variance column maps to zeros
    for (std::size_t i = 0; i < 3; ++i) CHECK(nz.at(i, 1) == 0.0);
}

TEST_CASE("test rows are normalized with train statistics") {
    Dataset train("t", {0.0, 2.0, 4.0}, 3, 1, {"x"}, {{0, 1}, {0, 1}, {0, 1}});
    Dataset test("s", {8.0}, 1, 1, {"x"}, {{0, 1}});
    auto pair = normalize_train_test(train, test);
    double sd = std::sqrt(8.0 / 3.0);
    CHECK(pair.test.at(0, 0) == doctest::Approx((8.0 - 2.0) / sd).epsilon(1e-12));
    double mean = 0;
    for (std::size_t i = 0; i < 3; ++i) mean += pair.train.at(i, 0);
    CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    Dataset wide("w", {1.0, 2.0}, 1, 2, {"a", "b"}, {{0, 1}});
    CHECK_THROWS_AS(normalize_train_test(train, wide), std::invalid_argument);
}

TEST_CASE("folds partition the rows with sizes differing by at most one") {
    for (std::size_t n : {5ul, 23ul, 100ul, 101ul}) {
        FoldAssignment fa = make_folds(n, 5, 99);
        std::set<std::size_t> seen;
        std::size_t lo = n, hi = 0;
        for (int f = 0; f < 5; ++f) {
            auto idx = fa.fold_indices(f);
            lo = std::min(lo, idx.size());
            hi = std::max(hi, idx.size());
            seen.insert(idx.begin(), idx.end());
            auto comp = fa.complement_indices(f);
            CHECK(idx.size() + comp.size() == n);
        }
        CHECK(seen.size() == n);
        CHECK(hi - lo <= 1);
    }
}

TEST_CASE("folds are seed-deterministic and seed-sensitive") {
    auto a = make_folds(40, 5, 1).fold_of;
    auto b = make_folds(40, 5, 1).fold_of;
    auto c = make_folds(40, 5, 2).fold_of;
    CHECK(a == b);
    CHECK(a != c);
    CHECK_THROWS_AS(make_folds(3, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_folds(10, 1, 0), std::invalid_argument);
}

TEST_CASE("synthetic census: 20 percent right and 20 percent left censored, disjoint") {
    SynthSpec spec;
    spec.kind = SynthKind::sin;
    spec.seed = 321;
    Dataset d = generate_synthetic(spec);
    REQUIRE(d.n_rows() == 200);
    REQUIRE(d.n_cols() == 20);
    int right = 0, left = 0, both = 0;
    for (const auto& t : d.targets()) {
        bool r = !t.finite_upper(), l = !t.finite_lower();
        right += r;
        left += l;
        both += r && l;
    }
    CHECK(right == 40);
    CHECK(left == 40);
    CHECK(both == 0);
    for (std::size_t i = 0; i < d.n_rows(); ++i)
        for (std::size_t j = 0; j < d.n_cols(); ++j) {
            CHECK(d.at(i, j) >= -10.0);
            CHECK(d.at(i, j) <= 10.0);
        }
}

TEST_CASE("synthetic generation is deterministic in the seed") {
    SynthSpec spec;
    spec.kind = SynthKind::abs;
    spec.seed = 777;
    Dataset a = generate_synthetic(spec), b = generate_synthetic(spec);
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        CHECK(a.target(i) == b.target(i));
        for (std::size_t j = 0; j < a.n_cols(); ++j) CHECK(a.at(i, j) == b.at(i, j));
    }
    spec.seed = 778;
    Dataset c = generate_synthetic(spec);
    bool any_diff = false;
    for (std::size_t j = 0; j < a.n_cols() && !any_diff; ++j)
        any_diff = a.at(0, j) != c.at(0, j);
    CHECK(any_diff);
}

TEST_CASE("synthetic signal column is recoverable from interval midpoints") {
    SynthSpec spec;
    spec.kind = SynthKind::linear;
    spec.seed = 9;
    Dataset d = generate_synthetic(spec);
    std::size_t signal = synthetic_signal_column(spec);
    REQUIRE(signal < d.n_cols());

    auto corr_with_mid = [&](std::size_t col) {
        std::vector<double> xs, ms;
        for (std::size_t i = 0; i < d.n_rows(); ++i) {
            const auto& t = d.target(i);
            if (!t.finite_lower() || !t.finite_upper()) continue;
            xs.push_back(d.at(i, col));
            ms.push_back(0.5 * (t.lower() + t.upper()));
        }
        double mx = 0, mm = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], mm += ms[i];
        mx /= xs.size(), mm /= ms.size();
        double sxm = 0, sxx = 0, smm = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxm += (xs[i] - mx) * (ms[i] - mm);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            smm += (ms[i] - mm) * (ms[i] - mm);
        }
        return sxm / std::sqrt(sxx * smm);
    };

    CHECK(corr_with_mid(signal) > 0.99);
    std::size_t other = (signal + 1) % d.n_cols();
    CHECK(std::abs(corr_with_mid(other)) < 0.3);
}

TEST_CASE("row subsets keep origins and feed the access log") {
    Dataset d = tiny();
    auto log = std::make_shared<RowAccessLog>();
    d.attach_access_log(log);
    std::vector<std::size_t> rows{2, 0};
    Dataset sub = d.subset_rows(rows);
    CHECK(sub.origin_row(0) == 2);
    CHECK(sub.origin_row(1) == 0);
    CHECK(sub.target(0) == d.target(2));
    CHECK(log->touched().empty());  // subsetting alone reads nothing
    sub.row(0);
    CHECK(log->touched() == std::vector<std::uint32_t>{2});
    log->clear();
    sub.row(1);
    CHECK(log->touched() == std::vector<std::uint32_t>{0});
}

TEST_CASE("column subsets pick the requested features") {
    Dataset d = tiny();
    std::vector<std::size_t> rows{0, 1, 2}, cols{1};
    Dataset sub = d.subset(rows, cols);
    REQUIRE(sub.n_cols() == 1);
    CHECK(sub.feature_names()[0] == "b");
    CHECK(sub.at(0, 0) == 2.0);
    CHECK(sub.at(1, 0) == -4.25);
    CHECK(sub.at(2, 0) == 9.0);
}
