#include "witnesslab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "witnesslab/rng.hpp"
#include "witnesslab/special.hpp"

namespace witnesslab {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Full (n+m) x (n+m) Gram matrix over the pooled rows.
std::vector<double> pooled_gram(const Sample& sp, const Sample& sq, const KernelSpec& k) {
    std::vector<const std::vector<double>*> pooled;
    pooled.reserve(sp.size() + sq.size());
    for (const auto& r : sp.rows()) pooled.push_back(&r);
    for (const auto& r : sq.rows()) pooled.push_back(&r);
    const std::size_t total = pooled.size();
    std::vector<double> gram(total * total);

    if (k.kind == KernelSpec::Kind::rank_one) {
        if (!k.h_fn) {
            throw std::invalid_argument("rank_one kernel requires an h function");
        }
        std::vector<double> h(total);
        for (std::size_t i = 0; i < total; ++i) h[i] = k.h_fn(*pooled[i]);
        for (std::size_t i = 0; i < total; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                gram[i * total + j] = gram[j * total + i] = h[i] * h[j];
            }
        }
        return gram;
    }

    double bw = k.bandwidth;
    if (bw <= 0.0) bw = median_heuristic_bandwidth(sp, sq);
    if (!(bw > 0.0)) {
        throw std::invalid_argument("gaussian kernel bandwidth must resolve to a positive value");
    }
    const double inv = -1.0 / (2.0 * bw * bw);
    for (std::size_t i = 0; i < total; ++i) {
        gram[i * total + i] = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double v = std::exp(inv * squared_distance(*pooled[i], *pooled[j]));
            gram[i * total + j] = gram[j * total + i] = v;
        }
    }
    return gram;
}

// Unbiased squared-MMD from a pooled Gram matrix and an index arrangement
// whose first n entries play the role of P.
double mmd2_from_gram(const std::vector<double>& gram, const std::vector<std::size_t>& order,
                      std::size_t n, std::size_t total) {
    const std::size_t m = total - n;
    double s_pp = 0.0, s_qq = 0.0, s_pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = gram.data() + order[i] * total;
        for (std::size_t j = 0; j < i; ++j) s_pp += row[order[j]];
        for (std::size_t j = n; j < total; ++j) s_pq += row[order[j]];
    }
    for (std::size_t i = n; i < total; ++i) {
        const double* row = gram.data() + order[i] * total;
        for (std::size_t j = n; j < i; ++j) s_qq += row[order[j]];
    }
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);
    return 2.0 * s_pp / (nd * (nd - 1.0)) + 2.0 * s_qq / (md * (md - 1.0)) -
           2.0 * s_pq / (nd * md);
}

double plug_in_variance(const std::vector<double>& v, bool unbiased) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / (unbiased ? n - 1.0 : n);
}

}  // namespace

double median_heuristic_bandwidth(const Sample& sp, const Sample& sq) {
    std::vector<const std::vector<double>*> pooled;
    for (const auto& r : sp.rows()) pooled.push_back(&r);
    for (const auto& r : sq.rows()) pooled.push_back(&r);
    std::vector<double> dists;
    dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double d = std::sqrt(squared_distance(*pooled[i], *pooled[j]));
            if (d > 0.0) dists.push_back(d);
        }
    }
    if (dists.empty()) {
        throw std::invalid_argument("median heuristic: all pooled rows coincide");
    }
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    return dists[mid];
}

double mmd2_unbiased(const Sample& sp, const Sample& sq, const KernelSpec& k) {
    if (sp.size() < 2 || sq.size() < 2) {
        throw std::invalid_argument("mmd2_unbiased: both samples need at least 2 rows");
    }
    if (sp.dim() != sq.dim()) {
        throw std::invalid_argument("mmd2_unbiased: dimension mismatch");
    }
    // the estimator is symmetric in its arguments; evaluate it in a canonical
    // order so the equality holds bitwise, not just up to summation rounding
    if (sq.rows() < sp.rows()) return mmd2_unbiased(sq, sp, k);
    const std::size_t total = sp.size() + sq.size();
    const std::vector<double> gram = pooled_gram(sp, sq, k);
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return mmd2_from_gram(gram, order, sp.size(), total);
}

TestOutcome mmd_permutation_test(const Sample& sp, const Sample& sq, const KernelSpec& k, int B,
                                 std::uint64_t seed, double alpha) {
    if (B < 1) {
        throw std::invalid_argument("mmd_permutation_test: B must be at least 1");
    }
    if (sp.size() < 2 || sq.size() < 2) {
        throw std::invalid_argument("mmd_permutation_test: both samples need at least 2 rows");
    }
    const std::size_t n = sp.size();
    const std::size_t total = n + sq.size();
    const std::vector<double> gram = pooled_gram(sp, sq, k);

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double observed = mmd2_from_gram(gram, order, n, total);

    Rng rng(seed);
    int t_count = 0;
    for (int b = 0; b < B; ++b) {
        shuffle(order, rng);
        if (mmd2_from_gram(gram, order, n, total) >= observed) ++t_count;
    }
    TestOutcome out;
    out.method = "permutation";
    out.tau = observed;  // the MMD^2 statistic takes the place of tau
    out.B = B;
    out.T = t_count;
    out.alpha = alpha;
    out.seed = seed;
    out.p_value = static_cast<double>(t_count + 1) / static_cast<double>(B + 1);
    out.reject = out.p_value <= alpha;
    return out;
}

std::vector<double> rank_one_mmd_witness(const std::vector<double>& h_vals_on_grid,
                                         const std::vector<double>& p_weights,
                                         const std::vector<double>& q_weights) {
    const std::size_t n = h_vals_on_grid.size();
    if (p_weights.size() != n || q_weights.size() != n) {
        throw std::invalid_argument("rank_one_mmd_witness: size mismatch");
    }
    double p_sum = 0.0, q_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p_sum += p_weights[i];
        q_sum += q_weights[i];
    }
    if (std::fabs(p_sum - 1.0) > 1e-12 || std::fabs(q_sum - 1.0) > 1e-12) {
        throw std::invalid_argument("rank_one_mmd_witness: weights must each sum to 1");
    }
    double discrepancy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        discrepancy += (p_weights[i] - q_weights[i]) * h_vals_on_grid[i];
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = h_vals_on_grid[i] * discrepancy;
    return out;
}

double f_test_equal_variance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2 || y.size() < 2) {
        throw std::invalid_argument("f_test_equal_variance: both samples need at least 2 values");
    }
    const double vx = plug_in_variance(x, true);
    const double vy = plug_in_variance(y, true);
    if (vx <= 0.0 || vy <= 0.0) {
        throw std::invalid_argument("f_test_equal_variance: zero variance in a sample");
    }
    const double f = vx / vy;
    const double cdf = f_distribution_cdf(f, static_cast<double>(x.size() - 1),
                                          static_cast<double>(y.size() - 1));
    return std::min(1.0, 2.0 * std::min(cdf, 1.0 - cdf));
}

}  // namespace witnesslab
