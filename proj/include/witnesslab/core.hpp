#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace witnesslab {

using Matrix = std::vector<std::vector<double>>;

/// An i.i.d. sample: rows of fixed dimension, all entries finite.
/// Immutable after construction.
class Sample {
  public:
    explicit Sample(Matrix rows);

    const Matrix& rows() const { return rows_; }
    const std::vector<double>& row(std::size_t i) const { return rows_[i]; }
    std::size_t size() const { return rows_.size(); }
    std::size_t dim() const { return dim_; }

  private:
    Matrix rows_;
    std::size_t dim_;
};

/// Deterministic train/test partition of a (P, Q) sample pair.
struct SplitPlan {
    std::vector<std::size_t> train_p_idx;
    std::vector<std::size_t> test_p_idx;
    std::vector<std::size_t> train_q_idx;
    std::vector<std::size_t> test_q_idx;
    double ratio = 0.5;
    std::uint64_t seed = 0;
    double c_train = 0.5;  // n_tr / (n_tr + m_tr)
    double c_test = 0.5;   // n_te / (n_te + m_te)
};

/// Rows from both training halves with 1/0 labels and the swapped
/// (1-c)/c weights of the training objective.
struct LabeledTrainSet {
    Matrix features;
    std::vector<int> labels;      // 1 for P rows, 0 for Q rows
    std::vector<double> weights;  // (1-c) for label 1, c for label 0
    double c = 0.5;               // n_tr / (n_tr + m_tr)

    std::size_t size() const { return features.size(); }
    std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
};

/// Uniformly random split of each sample into floor(ratio*count) training
/// rows and the remainder, driven only by the seed. Index lists are sorted.
SplitPlan split(const Sample& sp, const Sample& sq, double ratio, std::uint64_t seed);

/// Label P rows 1 and Q rows 0 and attach the swapped weights.
LabeledTrainSet label_and_weight(const Sample& train_p, const Sample& train_q);

/// Gather the rows of a sample selected by an index list.
Matrix gather_rows(const Sample& s, const std::vector<std::size_t>& idx);

/// Read a numeric CSV ('.' decimal separator, comma-separated, optional
/// header row) into a Sample.
Sample load_csv(const std::string& path, bool has_header);

}  // namespace witnesslab
