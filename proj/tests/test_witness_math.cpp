#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "witnesslab/rng.hpp"
#include "witnesslab/special.hpp"
#include "witnesslab/witness_math.hpp"

using namespace witnesslab;

namespace {

std::vector<double> random_vals(std::size_t n, Rng& rng, double scale = 1.0, double shift = 0.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * rng.gaussian() + shift;
    return v;
}

// Independent two-pass oracle for tau.
double naive_tau(const std::vector<double>& p, const std::vector<double>& q) {
    long double sp = 0.0L, sq = 0.0L;
    for (double x : p) sp += x;
    for (double x : q) sq += x;
    return static_cast<double>(sp / p.size() - sq / q.size());
}

// Independent plug-in moment oracle for sigma_c.
double naive_sigma(const std::vector<double>& p, const std::vector<double>& q, double c) {
    auto var = [](const std::vector<double>& v) {
        long double m = 0.0L;
        for (double x : v) m += x;
        m /= v.size();
        long double s = 0.0L;
        for (double x : v) s += (x - m) * (x - m);
        return static_cast<double>(s / v.size());
    };
    return std::sqrt(((1.0 - c) * var(p) + c * var(q)) / (c * (1.0 - c)));
}

std::vector<double> affine(const std::vector<double>& v, double g, double n) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = g * v[i] + n;
    return out;
}

}  // namespace

TEST_CASE("mean_discrepancy basic cases and summation oracle") {
    CHECK(mean_discrepancy(WitnessValues({1, 2, 3}, {1, 2, 3}, 0.5)) == 0.0);
    CHECK(mean_discrepancy(WitnessValues({1, 1}, {0, 0}, 0.5)) == 1.0);
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = random_vals(57, rng, 3.0, 1.0);
        const auto q = random_vals(23, rng, 0.5, -2.0);
        const WitnessValues w(p, q, 0.4);
        CHECK(mean_discrepancy(w) == doctest::Approx(naive_tau(p, q)).epsilon(1e-12));
    }
}

TEST_CASE("WitnessValues validates inputs") {
    CHECK_THROWS(WitnessValues({}, {1.0}, 0.5));
    CHECK_THROWS(WitnessValues({1.0}, {}, 0.5));
    CHECK_THROWS(WitnessValues({1.0}, {1.0}, 0.0));
    CHECK_THROWS(WitnessValues({1.0}, {1.0}, 1.0));
    CHECK_THROWS(WitnessValues({std::nan("")}, {1.0}, 0.5));
    const WitnessValues w = WitnessValues::from_counts({1, 2, 3}, {4});
    CHECK(w.c() == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("sigma_c on constants and the c=1/2 unit-variance case") {
    CHECK(sigma_c(WitnessValues({2, 2, 2}, {5, 5}, 0.5)) == 0.0);
    // plug-in Var of {-1, 1} is 1 for both sets, c = 1/2 -> sigma_c = 2
    CHECK(sigma_c(WitnessValues({-1, 1}, {0, 2}, 0.5)) == doctest::Approx(2.0).epsilon(1e-14));
    Rng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = random_vals(31, rng);
        const auto q = random_vals(47, rng, 2.0);
        const double c = 0.3;
        CHECK(sigma_c(WitnessValues(p, q, c)) ==
              doctest::Approx(naive_sigma(p, q, c)).epsilon(1e-12));
    }
}

TEST_CASE("snr is affine invariant and rejects degenerate witnesses") {
    CHECK_THROWS(snr(WitnessValues({1, 1}, {0, 0}, 0.5)));
    Rng rng(13);
    const auto p = random_vals(40, rng, 1.0, 0.7);
    const auto q = random_vals(40, rng, 1.0, 0.0);
    const WitnessValues w(p, q, 0.5);
    const double base = snr(w);
    CHECK(snr(WitnessValues(affine(p, 3.0, -7.0), affine(q, 3.0, -7.0), 0.5)) ==
          doctest::Approx(base).epsilon(1e-12));
    CHECK(snr(WitnessValues(affine(p, -2.0, 1.0), affine(q, -2.0, 1.0), 0.5)) ==
          doctest::Approx(-base).epsilon(1e-12));
}

TEST_CASE("weighted_mse hand-checked values") {
    CHECK(weighted_mse(WitnessValues({1, 1, 1}, {0, 0}, 0.5)) == 0.0);
    CHECK(weighted_mse(WitnessValues({0.5, 0.5}, {0.5, 0.5}, 0.5)) ==
          doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("affine_calibrate fixed point and inverse transform") {
    Rng rng(14);
    const auto p = random_vals(60, rng, 1.0, 1.0);
    const auto q = random_vals(40, rng, 1.5, 0.0);
    const WitnessValues raw(p, q, 0.6);
    const AffineCalibration cal = affine_calibrate(raw);
    const WitnessValues opt = apply_calibration(raw, cal);

    // already optimal -> identity
    const AffineCalibration again = affine_calibrate(opt);
    CHECK(again.gamma == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(again.nu == doctest::Approx(0.0).epsilon(1e-9));

    // 2h+3 of an optimal h -> (0.5, -1.5)
    const WitnessValues stretched(affine(opt.vals_p(), 2.0, 3.0), affine(opt.vals_q(), 2.0, 3.0),
                                  0.6);
    const AffineCalibration inv = affine_calibrate(stretched);
    CHECK(inv.gamma == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(inv.nu == doctest::Approx(-1.5).epsilon(1e-9));
}

TEST_CASE("affine_calibrate matches a dense grid search") {
    Rng rng(15);
    const auto p = random_vals(25, rng, 1.0, 0.4);
    const auto q = random_vals(35, rng, 0.8, 0.0);
    const WitnessValues w(p, q, 0.45);
    const AffineCalibration cal = affine_calibrate(w);
    const double best = weighted_mse(apply_calibration(w, cal));

    double grid_best = 1e18;
    for (double g = -3.0; g <= 3.0; g += 0.002) {
        for (double n = -2.0; n <= 2.0; n += 0.002) {
            const double loss = weighted_mse(apply_calibration(w, {g, n, false}));
            grid_best = std::min(grid_best, loss);
        }
    }
    CHECK(best <= grid_best + 1e-8);
    CHECK(std::fabs(best - grid_best) <= 1e-5);  // grid resolution bound
}

TEST_CASE("affine_calibrate on a constant witness returns the best constant") {
    const WitnessValues w({0.7, 0.7}, {0.7, 0.7, 0.7}, 0.4);
    const AffineCalibration cal = affine_calibrate(w);
    CHECK(cal.degenerate);
    CHECK(cal.gamma == 0.0);
    CHECK(cal.nu == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("loss/SNR identity on random empirical data") {
    Rng rng(16);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 10 + rng.below(90);
        const std::size_t m = 10 + rng.below(90);
        const auto p = random_vals(n, rng, 1.0 + rng.uniform01(), rng.gaussian());
        const auto q = random_vals(m, rng, 0.5 + rng.uniform01(), 0.0);
        const WitnessValues w(p, q, double(n) / double(n + m));
        const double loss = weighted_mse(apply_calibration(w, affine_calibrate(w)));
        CHECK(std::fabs(loss - lemma1_rhs(w.c(), snr(w))) <= 1e-9);
    }
}

TEST_CASE("lemma1_rhs arithmetic") {
    CHECK(lemma1_rhs(0.5, 0.0) == 0.25);
    CHECK(lemma1_rhs(0.5, -0.5) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("asymptotic_power boundary and monotonicity") {
    for (double alpha : {0.01, 0.05, 0.1}) {
        CHECK(std::fabs(asymptotic_power(0.0, 1.0, 100, 100, alpha) - alpha) <= 1e-10);
    }
    // sqrt(N) tau / sigma at the threshold quantile -> power 1/2
    const double z = normal_quantile(0.95);
    CHECK(asymptotic_power(z / std::sqrt(400.0), 1.0, 200, 200, 0.05) ==
          doctest::Approx(0.5).epsilon(1e-10));
    double prev = -1.0;
    for (double tau = -0.5; tau <= 0.5; tau += 0.05) {
        const double v = asymptotic_power(tau, 2.0, 50, 50, 0.05);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS(asymptotic_power(0.1, 0.0, 10, 10, 0.05));
}

TEST_CASE("analytic_threshold values") {
    CHECK(analytic_threshold(3.0, 10, 10, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(analytic_threshold(0.0, 10, 10, 0.05) == 0.0);
    CHECK(analytic_threshold(2.0, 200, 200, 0.05) ==
          doctest::Approx(2.0 / 20.0 * 1.6448536269514722).epsilon(1e-6));
}

TEST_CASE("optimal_witness closed-form points") {
    const auto log_std = [](const std::vector<double>& x) {
        return -0.5 * x[0] * x[0] - 0.9189385332046727;
    };
    DensityPair same{log_std, log_std, 0.5};
    CHECK(optimal_witness(same, {0.3}) == doctest::Approx(0.5).epsilon(1e-12));

    // p = 2q at every x: h* = 2/3 at c = 1/2
    DensityPair twice{[&](const std::vector<double>& x) { return log_std(x) + std::log(2.0); },
                      log_std, 0.5};
    CHECK(optimal_witness(twice, {1.1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    const double neg_inf = -std::numeric_limits<double>::infinity();
    DensityPair empty{[=](const std::vector<double>&) { return neg_inf; },
                      [=](const std::vector<double>&) { return neg_inf; }, 0.5};
    CHECK_THROWS(optimal_witness(empty, {0.0}));
}

TEST_CASE("optimal_witness minimizes the per-point integrand") {
    Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        const double lp = rng.gaussian();
        const double lq = rng.gaussian();
        const double c = 0.05 + 0.9 * rng.uniform01();
        DensityPair dp{[&](const std::vector<double>&) { return lp; },
                       [&](const std::vector<double>&) { return lq; }, c};
        const double h_star = optimal_witness(dp, {0.0});
        const double p = std::exp(lp), q = std::exp(lq);
        auto integrand = [&](double h) {
            return (1.0 - c) * p * (1.0 - h) * (1.0 - h) + c * q * h * h;
        };
        // fine scan oracle around [0,1]
        double best_h = 0.0, best_v = integrand(0.0);
        for (double h = 0.0; h <= 1.0; h += 1e-5) {
            const double v = integrand(h);
            if (v < best_v) {
                best_v = v;
                best_h = h;
            }
        }
        CHECK(std::fabs(h_star - best_h) <= 1e-4);
        CHECK(integrand(h_star) <= best_v + 1e-12);
    }
}

TEST_CASE("finite-family loss argmin equals SNR^2 argmax") {
    Rng rng(18);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 6 + rng.below(10);
        const std::size_t m = 6 + rng.below(10);
        const double c = double(n) / double(n + m);
        std::vector<std::vector<double>> fam;
        for (int k = 0; k < 8; ++k) fam.push_back(random_vals(n + m, rng));
        std::size_t best_loss_idx = 0, best_snr_idx = 0;
        double best_loss = 1e18, best_snr2 = -1.0;
        for (std::size_t k = 0; k < fam.size(); ++k) {
            std::vector<double> hp(fam[k].begin(), fam[k].begin() + n);
            std::vector<double> hq(fam[k].begin() + n, fam[k].end());
            const WitnessValues w(hp, hq, c);
            const double loss = weighted_mse(apply_calibration(w, affine_calibrate(w)));
            const double s = snr(w);
            if (loss < best_loss) {
                best_loss = loss;
                best_loss_idx = k;
            }
            if (s * s > best_snr2) {
                best_snr2 = s * s;
                best_snr_idx = k;
            }
        }
        CHECK(best_loss_idx == best_snr_idx);
    }
}
