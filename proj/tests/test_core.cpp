#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <string>

#include "witnesslab/core.hpp"
#include "witnesslab/rng.hpp"

using namespace witnesslab;

namespace {

Sample gaussian_sample(std::size_t n, std::size_t d, std::uint64_t seed, double shift = 0.0) {
    Rng rng(seed);
    Matrix rows(n, std::vector<double>(d));
    for (auto& r : rows)
        for (auto& v : r) v = rng.gaussian() + shift;
    return Sample(rows);
}

void check_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                     std::size_t n) {
    std::set<std::size_t> all(a.begin(), a.end());
    all.insert(b.begin(), b.end());
    CHECK(all.size() == n);
    CHECK(a.size() + b.size() == n);
    if (!all.empty()) {
        CHECK(*all.begin() == 0);
        CHECK(*all.rbegin() == n - 1);
    }
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(std::is_sorted(b.begin(), b.end()));
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/witnesslab_core_") + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("Sample construction validates its rows") {
    CHECK_THROWS(Sample(Matrix{}));
    CHECK_THROWS(Sample(Matrix{{}}));
    CHECK_THROWS(Sample(Matrix{{1.0, 2.0}, {3.0}}));
    CHECK_THROWS(Sample(Matrix{{std::numeric_limits<double>::quiet_NaN()}}));
    CHECK_THROWS(Sample(Matrix{{std::numeric_limits<double>::infinity()}}));
    const Sample s(Matrix{{1.0, 2.0}, {3.0, 4.0}});
    CHECK(s.size() == 2);
    CHECK(s.dim() == 2);
    CHECK(s.row(1)[0] == 3.0);
}

TEST_CASE("split produces the stated sizes on balanced input") {
    const Sample sp = gaussian_sample(4, 2, 1);
    const Sample sq = gaussian_sample(4, 2, 2);
    const SplitPlan plan = split(sp, sq, 0.5, 42);
    CHECK(plan.train_p_idx.size() == 2);
    CHECK(plan.test_p_idx.size() == 2);
    CHECK(plan.train_q_idx.size() == 2);
    CHECK(plan.test_q_idx.size() == 2);
    CHECK(plan.c_train == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(plan.c_test == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("split at n=540 gives 270 train and 270 test per sample") {
    const Sample sp = gaussian_sample(540, 2, 3);
    const Sample sq = gaussian_sample(540, 2, 4);
    const SplitPlan plan = split(sp, sq, 0.5, 7);
    CHECK(plan.train_p_idx.size() == 270);
    CHECK(plan.test_p_idx.size() == 270);
    CHECK(plan.train_q_idx.size() == 270);
    CHECK(plan.test_q_idx.size() == 270);
}

TEST_CASE("split is deterministic and partitions both index ranges") {
    const Sample sp = gaussian_sample(53, 3, 5);
    const Sample sq = gaussian_sample(31, 3, 6);
    const SplitPlan a = split(sp, sq, 0.4, 99);
    const SplitPlan b = split(sp, sq, 0.4, 99);
    CHECK(a.train_p_idx == b.train_p_idx);
    CHECK(a.test_p_idx == b.test_p_idx);
    CHECK(a.train_q_idx == b.train_q_idx);
    CHECK(a.test_q_idx == b.test_q_idx);
    check_partition(a.train_p_idx, a.test_p_idx, 53);
    check_partition(a.train_q_idx, a.test_q_idx, 31);

    const std::size_t n_tr = a.train_p_idx.size();
    const std::size_t m_tr = a.train_q_idx.size();
    CHECK(a.c_train ==
          doctest::Approx(double(n_tr) / double(n_tr + m_tr)).epsilon(1e-15));
    // a different seed should produce a different plan with high probability
    const SplitPlan c = split(sp, sq, 0.4, 100);
    CHECK(a.train_p_idx != c.train_p_idx);
}

TEST_CASE("split rejects ratios that starve either half") {
    const Sample tiny = gaussian_sample(1, 1, 8);
    const Sample big = gaussian_sample(10, 1, 9);
    CHECK_THROWS_WITH_AS(split(tiny, big, 0.5, 0), doctest::Contains("insufficient data"),
                         std::invalid_argument);
    CHECK_THROWS(split(big, big, 0.0, 0));
    CHECK_THROWS(split(big, big, 1.0, 0));
}

TEST_CASE("label_and_weight on balanced halves") {
    const Sample p = gaussian_sample(5, 2, 10);
    const Sample q = gaussian_sample(5, 2, 11);
    const LabeledTrainSet data = label_and_weight(p, q);
    CHECK(data.c == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(data.size() == 10);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(data.weights[i] == 0.5);
        CHECK(data.labels[i] == (i < 5 ? 1 : 0));
    }
}

TEST_CASE("label_and_weight with unequal counts uses swapped weights") {
    const Sample p = gaussian_sample(1, 2, 12);
    const Sample q = gaussian_sample(3, 2, 13);
    const LabeledTrainSet data = label_and_weight(p, q);
    CHECK(data.c == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(data.weights[0] == 0.75);
    for (std::size_t i = 1; i < 4; ++i) CHECK(data.weights[i] == 0.25);

    // sum of weights per label block: (1-c) n_tr and c m_tr
    double w1 = 0.0, w0 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        (data.labels[i] == 1 ? w1 : w0) += data.weights[i];
    }
    CHECK(w1 == doctest::Approx((1.0 - data.c) * 1.0).epsilon(1e-15));
    CHECK(w0 == doctest::Approx(data.c * 3.0).epsilon(1e-15));
}

TEST_CASE("label_and_weight rejects mismatched dimensions") {
    const Sample p = gaussian_sample(2, 3, 14);
    const Sample q = gaussian_sample(2, 2, 15);
    CHECK_THROWS(label_and_weight(p, q));
}

TEST_CASE("gather_rows selects by index") {
    const Sample s(Matrix{{0.0}, {1.0}, {2.0}, {3.0}});
    const Matrix picked = gather_rows(s, {3, 1});
    REQUIRE(picked.size() == 2);
    CHECK(picked[0][0] == 3.0);
    CHECK(picked[1][0] == 1.0);
}

TEST_CASE("load_csv parses plain and headered files") {
    const std::string plain = write_temp("plain.csv", "1.5,2\n-3.25,4e-2\n");
    const Sample s = load_csv(plain, false);
    CHECK(s.size() == 2);
    CHECK(s.dim() == 2);
    CHECK(s.row(0)[0] == 1.5);
    CHECK(s.row(1)[1] == doctest::Approx(0.04).epsilon(1e-15));

    const std::string headered = write_temp("head.csv", "a,b\n1,2\n 3 , 4 \n");
    const Sample h = load_csv(headered, true);
    CHECK(h.size() == 2);
    CHECK(h.row(1)[0] == 3.0);
}

TEST_CASE("load_csv error cases are distinct") {
    CHECK_THROWS_WITH_AS(load_csv("/tmp/witnesslab_does_not_exist.csv", false),
                         doctest::Contains("open"), std::runtime_error);
    const std::string bad = write_temp("bad.csv", "1,2\nx,4\n");
    CHECK_THROWS_WITH_AS(load_csv(bad, false), doctest::Contains("parse"), std::runtime_error);
    const std::string ragged = write_temp("ragged.csv", "1,2\n3\n");
    CHECK_THROWS(load_csv(ragged, false));
}

TEST_CASE("derive_seed expansion is stable and spreads indices") {
    const std::uint64_t a = derive_seed(12345, 0);
    const std::uint64_t b = derive_seed(12345, 1);
    CHECK(a == derive_seed(12345, 0));
    CHECK(a != b);
    CHECK(derive_seed(12346, 0) != a);
}
