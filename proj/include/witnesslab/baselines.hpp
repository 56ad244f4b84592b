#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "witnesslab/core.hpp"
#include "witnesslab/inference.hpp"

namespace witnesslab {

/// Kernel for the MMD baseline. A bandwidth of 0 requests the median
/// heuristic (median pairwise distance on the pooled sample).
struct KernelSpec {
    enum class Kind { gaussian, rank_one };
    Kind kind = Kind::gaussian;
    double bandwidth = 0.0;  // gaussian only; 0 = median heuristic
    std::function<double(const std::vector<double>&)> h_fn;  // rank_one only

    static KernelSpec gaussian_median() { return KernelSpec{}; }
    static KernelSpec gaussian(double bw) { return KernelSpec{Kind::gaussian, bw, nullptr}; }
    static KernelSpec rank_one(std::function<double(const std::vector<double>&)> h) {
        return KernelSpec{Kind::rank_one, 0.0, std::move(h)};
    }
};

/// Median of nonzero pairwise Euclidean distances over the pooled rows.
double median_heuristic_bandwidth(const Sample& sp, const Sample& sq);

/// Unbiased U-statistic estimate of the squared MMD.
double mmd2_unbiased(const Sample& sp, const Sample& sq, const KernelSpec& k);

/// Permutation test on the squared-MMD statistic. The Gram matrix is
/// computed once; permutations only re-index it.
TestOutcome mmd_permutation_test(const Sample& sp, const Sample& sq, const KernelSpec& k, int B,
                                 std::uint64_t seed, double alpha = 0.05);

/// MMD-witness mu_P - mu_Q of the rank-one kernel k(x,x') = h(x)h(x') on a
/// finite discrete domain: h(x') * (E_P h - E_Q h) per grid point.
std::vector<double> rank_one_mmd_witness(const std::vector<double>& h_vals_on_grid,
                                         const std::vector<double>& p_weights,
                                         const std::vector<double>& q_weights);

/// Two-sided F-test of equal variance for one-dimensional data; returns the
/// p-value 2*min(F_cdf, 1 - F_cdf).
double f_test_equal_variance(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace witnesslab
