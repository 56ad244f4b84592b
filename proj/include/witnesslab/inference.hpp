#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "witnesslab/core.hpp"
#include "witnesslab/learners.hpp"
#include "witnesslab/witness_math.hpp"

namespace witnesslab {

/// Result of a two-sample test: the statistic, the p-value and diagnostics.
struct TestOutcome {
    double tau = 0.0;
    double p_value = 1.0;
    std::string method;       // "permutation" or "asymptotic"
    int B = 0;                // permutations used (0 for asymptotic)
    int T = 0;                // permuted statistics at least as extreme
    double sigma_hat = 0.0;
    double snr_hat = 0.0;
    bool reject = false;      // p_value <= alpha
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bool degenerate = false;  // constant witness on the test halves

    /// Stable wire format: {tau, p_value, method, B, T, sigma_hat, snr_hat,
    /// reject, alpha, seed}, keys in this order.
    std::string to_json() const;
};

struct PipelineConfig {
    double ratio = 0.5;
    double alpha = 0.05;
    int permutations = 999;
    std::uint64_t seed = 0;
    bool asymptotic = false;  // default is the permutation path
    BudgetConfig budget;
    std::optional<LearnerKind> single_learner;  // bypasses fit_auto when set
    bool binarized = false;                     // threshold the witness at 1/2
};

/// One-sided Monte-Carlo permutation p-value over pooled witness values:
/// p = (T+1)/(B+1) with T = #{b : tau'_b >= tau}.
TestOutcome permutation_pvalue(const WitnessValues& w, int B, std::uint64_t seed,
                               double alpha = 0.05);

/// Exhaustive-enumeration p-value over all C(n+m, n) splits; testing oracle
/// for the Monte-Carlo estimator. Guarded against combinatorial blow-up.
double exact_permutation_pvalue(const WitnessValues& w);

/// p = 1 - Phi(sqrt(n+m) tau / sigma_hat), plug-in sigma. A degenerate
/// witness yields p = 1 with the degeneracy flag set.
TestOutcome asymptotic_pvalue(const WitnessValues& w, double alpha = 0.05);

struct PipelineResult {
    TestOutcome outcome;
    Witness witness;
    SplitPlan plan;
};

/// The full pipeline: split, label, fit, evaluate once per test row, p-value.
PipelineResult run_test_full(const Sample& sp, const Sample& sq, const PipelineConfig& cfg);
TestOutcome run_test(const Sample& sp, const Sample& sq, const PipelineConfig& cfg);

/// One reported extreme row of the pooled test set.
struct InterpretEntry {
    std::size_t rank = 0;       // 1-based within its block
    char origin = 'P';          // which sample the row came from
    double witness_value = 0.0;
    std::vector<double> features;
};

struct InterpretationReport {
    std::vector<InterpretEntry> top;     // highest witness values, descending
    std::vector<InterpretEntry> bottom;  // lowest witness values, ascending
    bool clamped = false;                // k exceeded the pooled size

    std::string to_json() const;
    std::string to_csv() const;
};

/// The k most extreme test rows in both directions; ties broken by pooled
/// row index (P rows first).
InterpretationReport interpret(const Witness& w, const Sample& test_p, const Sample& test_q,
                               std::size_t k);

/// Classification accuracy of a binary witness on balanced test sets,
/// computed as 1/2 + tau/2.
double c2st_accuracy(const WitnessValues& w_binary);

}  // namespace witnesslab
