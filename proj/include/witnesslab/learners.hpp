#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "witnesslab/core.hpp"
#include "witnesslab/witness_math.hpp"

namespace witnesslab {

enum class LearnerKind { constant, ridge, knn, boosted_trees, xent_trees };

LearnerKind learner_kind_from_string(const std::string& name);
std::string to_string(LearnerKind kind);

/// A fitted base model. Immutable and safe to evaluate concurrently.
class Model {
  public:
    virtual ~Model() = default;
    virtual std::size_t dim() const = 0;
    virtual std::vector<double> predict(const Matrix& xs) const = 0;
};

struct WitnessMeta {
    std::string kind;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double fit_seconds = 0.0;
    bool budget_exhausted = false;
};

/// An evaluable witness: base model plus the affine calibration fitted on
/// the validation holdout.
struct Witness {
    std::shared_ptr<const Model> base;
    AffineCalibration calibration;
    WitnessMeta meta;
};

struct BudgetConfig {
    double time_limit_s = 60.0;  // +infinity disables the budget entirely
    double validation_fraction = 0.2;
    std::vector<LearnerKind> candidates = {LearnerKind::constant, LearnerKind::ridge,
                                           LearnerKind::knn, LearnerKind::boosted_trees,
                                           LearnerKind::xent_trees};
    std::uint64_t seed = 0;
    int ensemble_max_members = 25;
};

/// Validation-driven model selection and greedy ensembling under a wall
/// clock budget. Always returns at least the best-constant witness.
Witness fit_auto(const LabeledTrainSet& data, const BudgetConfig& cfg);

/// Fit one learner with an internal stratified 80/20 holdout.
Witness fit_single(LearnerKind kind, const LabeledTrainSet& data, std::uint64_t seed);

/// Fit one learner against an explicit fit/validation partition of `data`
/// (index lists into data rows). Calibration is fitted on the holdout.
Witness fit_single_holdout(LearnerKind kind, const LabeledTrainSet& data,
                           const std::vector<std::size_t>& fit_idx,
                           const std::vector<std::size_t>& val_idx, std::uint64_t seed);

/// Evaluate the calibrated witness on a matrix of rows.
std::vector<double> predict(const Witness& w, const Matrix& xs);

/// Threshold a witness into a 0/1 classifier-style witness.
Witness binarize(const Witness& w, double threshold = 0.5);

/// Eq.-style weighted squared loss of predictions against 1/0 labels with
/// per-group normalization: (1-c) mean over label-1 rows of (1-h)^2 plus
/// c mean over label-0 rows of h^2.
double weighted_label_loss(const std::vector<double>& preds, const std::vector<int>& labels,
                           double c);

/// Stratified (per label) holdout split of row indices.
void stratified_split(const std::vector<int>& labels, double validation_fraction,
                      std::uint64_t seed, std::vector<std::size_t>& fit_idx,
                      std::vector<std::size_t>& val_idx);

}  // namespace witnesslab
