#include "witnesslab/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "witnesslab/rng.hpp"

namespace witnesslab {

Sample::Sample(Matrix rows) : rows_(std::move(rows)) {
    if (rows_.empty()) {
        throw std::invalid_argument("Sample: need at least one row");
    }
    dim_ = rows_.front().size();
    if (dim_ == 0) {
        throw std::invalid_argument("Sample: rows must have dimension >= 1");
    }
    for (const auto& r : rows_) {
        if (r.size() != dim_) {
            throw std::invalid_argument("Sample: rows have inconsistent dimensions");
        }
        for (double v : r) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("Sample: non-finite entry rejected");
            }
        }
    }
}

namespace {

// Shuffled partition of 0..count-1 into (train, test) with |train| =
// floor(ratio*count). Both halves returned sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
partition_indices(std::size_t count, double ratio, std::uint64_t seed) {
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count)));
    if (n_train < 1 || count - n_train < 1) {
        throw std::invalid_argument("split: insufficient data for the requested ratio");
    }
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    shuffle(idx, rng);
    std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

}  // namespace

SplitPlan split(const Sample& sp, const Sample& sq, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("split: ratio must lie in (0,1)");
    }
    SplitPlan plan;
    plan.ratio = ratio;
    plan.seed = seed;
    std::tie(plan.train_p_idx, plan.test_p_idx) =
        partition_indices(sp.size(), ratio, derive_seed(seed, 0));
    std::tie(plan.train_q_idx, plan.test_q_idx) =
        partition_indices(sq.size(), ratio, derive_seed(seed, 1));
    const double n_tr = static_cast<double>(plan.train_p_idx.size());
    const double m_tr = static_cast<double>(plan.train_q_idx.size());
    const double n_te = static_cast<double>(plan.test_p_idx.size());
    const double m_te = static_cast<double>(plan.test_q_idx.size());
    plan.c_train = n_tr / (n_tr + m_tr);
    plan.c_test = n_te / (n_te + m_te);
    return plan;
}

LabeledTrainSet label_and_weight(const Sample& train_p, const Sample& train_q) {
    if (train_p.dim() != train_q.dim()) {
        throw std::invalid_argument("label_and_weight: dimension mismatch between samples");
    }
    const double n_tr = static_cast<double>(train_p.size());
    const double m_tr = static_cast<double>(train_q.size());
    LabeledTrainSet out;
    out.c = n_tr / (n_tr + m_tr);
    out.features.reserve(train_p.size() + train_q.size());
    out.labels.reserve(out.features.capacity());
    out.weights.reserve(out.features.capacity());
    for (const auto& r : train_p.rows()) {
        out.features.push_back(r);
        out.labels.push_back(1);
        out.weights.push_back(1.0 - out.c);
    }
    for (const auto& r : train_q.rows()) {
        out.features.push_back(r);
        out.labels.push_back(0);
        out.weights.push_back(out.c);
    }
    return out;
}

Matrix gather_rows(const Sample& s, const std::vector<std::size_t>& idx) {
    Matrix out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(s.row(i));
    return out;
}

Sample load_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_csv: cannot open file: " + path);
    }
    Matrix rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && has_header) continue;
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            const char* lo = p;
            const char* hi = comma;
            while (lo < hi && (*lo == ' ' || *lo == '\t')) ++lo;
            while (hi > lo && (hi[-1] == ' ' || hi[-1] == '\t')) --hi;
            double v = 0.0;
            auto [next, ec] = std::from_chars(lo, hi, v);
            if (ec != std::errc{} || next != hi) {
                throw std::runtime_error("load_csv: parse error at " + path + ":" +
                                         std::to_string(line_no));
            }
            row.push_back(v);
            if (comma == end) break;
            p = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return Sample(std::move(rows));  // dimension/finiteness checks happen here
}

}  // namespace witnesslab
