#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "witnesslab/special.hpp"

using namespace witnesslab;

TEST_CASE("normal_cdf matches reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    // Phi(1) and Phi(2), 16 digits
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
    CHECK(normal_cdf(2.0) == doctest::Approx(0.9772498680518208).epsilon(1e-12));
    CHECK(normal_cdf(1.6448536269514722) == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-6));
}

TEST_CASE("normal_cdf symmetry") {
    for (double x : {0.1, 0.7, 1.3, 2.9, 4.2}) {
        CHECK(normal_cdf(x) + normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("normal_quantile inverts normal_cdf") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-10));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.9599639845400545).epsilon(1e-10));
    for (double p = 0.01; p < 1.0; p += 0.07) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK_THROWS(normal_quantile(0.0));
    CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("regularized incomplete beta closed forms") {
    // I_x(1,1) = x
    for (double x = 0.0; x <= 1.0; x += 0.125) {
        CHECK(regularized_incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
    }
    // I_x(2,2) = 3x^2 - 2x^3
    for (double x = 0.05; x < 1.0; x += 0.1) {
        CHECK(regularized_incomplete_beta(2.0, 2.0, x) ==
              doctest::Approx(3 * x * x - 2 * x * x * x).epsilon(1e-12));
    }
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
    CHECK(regularized_incomplete_beta(3.5, 7.25, 0.3) ==
          doctest::Approx(1.0 - regularized_incomplete_beta(7.25, 3.5, 0.7)).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(2.0, 5.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 5.0, 1.0) == 1.0);
}

TEST_CASE("F distribution CDF properties") {
    // equal degrees of freedom: median at f = 1
    for (double d : {3.0, 10.0, 49.0, 200.0}) {
        CHECK(f_distribution_cdf(1.0, d, d) == doctest::Approx(0.5).epsilon(1e-10));
    }
    // d1 = 2 closed form: 1 - (1 + 2 f / d2)^(-d2/2)
    for (double f = 0.25; f < 6.0; f += 0.5) {
        const double d2 = 8.0;
        CHECK(f_distribution_cdf(f, 2.0, d2) ==
              doctest::Approx(1.0 - std::pow(1.0 + 2.0 * f / d2, -d2 / 2.0)).epsilon(1e-10));
    }
    CHECK(f_distribution_cdf(0.0, 5.0, 5.0) == 0.0);
    // monotone in f
    double prev = -1.0;
    for (double f = 0.0; f < 10.0; f += 0.25) {
        const double v = f_distribution_cdf(f, 7.0, 11.0);
        CHECK(v >= prev);
        prev = v;
    }
}
