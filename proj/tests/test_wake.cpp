#include <cmath>
#include <random>

#include "doctest.h"
#include "tposeen/wake.hpp"

using namespace tposeen;

namespace {

// independent oracle: long double series for small z, gamma + log z + E1 by
// Simpson quadrature for larger z (no shared code with the implementation)
long double ein_series_small(long double z) {
    long double sum = 0, term = 1;
    for (int n = 1; n <= 200; ++n) {
        term *= z / n;
        sum += ((n % 2) ? term : -term) / n;
        if (n > z && std::abs(static_cast<double>(term / n)) < 1e-24) break;
    }
    return sum;
}

double e1_quadrature(double z) {
    // int_0^U e^{-z-u}/(z+u) du, composite Simpson
    const int n = 20000;  // even
    const double U = 80.0;
    const double h = U / n;
    auto f = [&](double u) { return std::exp(-z - u) / (z + u); };
    double s = f(0) + f(U);
    for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double ein_oracle(double z) {
    constexpr double gamma = 0.57721566490153286060651209008240243;
    if (z <= 5.0) return static_cast<double>(ein_series_small(z));
    return gamma + std::log(z) + e1_quadrature(z);
}

}  // namespace

TEST_CASE("wake function definition and degeneracy") {
    CHECK(wake({1, 0, 0}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(wake({-1, 0, 0}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(wake({0, 3, 4}) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("wake positivity and homogeneity on random samples") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1, 1);
    for (int i = 0; i < 2000; ++i) {
        Vec3 x{10 * uni(rng), 10 * uni(rng), 10 * uni(rng)};
        double s = wake(x);
        CHECK(s >= 0.0);
        double a = 0.1 + 5 * std::abs(uni(rng));
        CHECK(wake(x * a) == doctest::Approx(a * s).epsilon(1e-12));
    }
}

TEST_CASE("wake compensated form keeps precision near the negative axis") {
    Vec3 x{-100.0, 1e-3, 0.0};
    long double r = std::sqrt(static_cast<long double>(x.x) * x.x + 1e-6L);
    long double exact = 1e-6L / (r - x.x);
    CHECK(wake(x) == doctest::Approx(static_cast<double>(exact)).epsilon(1e-12));
}

TEST_CASE("ein values against independent oracles") {
    CHECK(ein(0.0) == 0.0);
    // oracle: compensated series
    CHECK(ein(1.0) == doctest::Approx(0.7965995992970531).epsilon(1e-13));
    // oracle: gamma + log 2 + E1(2), E1 from the series branch
    CHECK(ein(2.0) == doctest::Approx(1.3192633561695383).epsilon(1e-13));
    CHECK_THROWS_AS(ein(-0.1), std::invalid_argument);
}

TEST_CASE("ein absolute accuracy across the branch switch") {
    for (double z : {1e-6, 0.5, 5.0, 15.0, 29.5, 29.999, 30.001, 35.0, 40.0}) {
        double oracle = ein_oracle(z);
        CHECK(std::abs(ein(z) - oracle) <= 1e-12);
    }
    // far branch: E1 negligible below 1e-12, compare with gamma + log z
    constexpr double gamma = 0.57721566490153286;
    for (double z : {50.0, 200.0, 700.0})
        CHECK(std::abs(ein(z) - (gamma + std::log(z) + expint_e1(z))) <= 1e-13);
    CHECK(std::abs(ein(60.0) - (gamma + std::log(60.0))) <= 1e-12);
}

TEST_CASE("ein derivative matches finite differences") {
    for (double z = 0.1; z <= 100.0; z *= 1.9) {
        double h = 1e-5 * std::max(1.0, z);
        double fd = (ein(z + h) - ein(z - h)) / (2 * h);
        CHECK(ein_d1(z) == doctest::Approx(fd).epsilon(1e-8));
    }
}

TEST_CASE("ein_d2 and ein_d3 are consistent across the series cutover") {
    for (double z : {0.49, 0.51, 0.2, 1.0}) {
        double h = 1e-4;
        CHECK(ein_d2(z) == doctest::Approx((ein_d1(z + h) - ein_d1(z - h)) / (2 * h)).epsilon(1e-6));
        CHECK(ein_d3(z) == doctest::Approx((ein_d2(z + h) - ein_d2(z - h)) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("sqrt_neg_mu branch and defining identity") {
    Complex w = sqrt_neg_mu(1e-12, 2.0);
    CHECK(w.real() == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(w.imag() == doctest::Approx(1.0).epsilon(1e-6));

    // oracle: high-precision complex arithmetic, square equals -1 - i
    w = sqrt_neg_mu(1.0, 2.0);
    CHECK(w.real() == doctest::Approx(-0.4550898605622273).epsilon(1e-12));
    CHECK(w.imag() == doctest::Approx(1.0986841134678100).epsilon(1e-12));
    Complex sq = w * w;
    CHECK(std::abs(sq - Complex(-1.0, -1.0)) < 1e-14);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1, 1);
    for (int i = 0; i < 500; ++i) {
        double eta = 50 * uni(rng);
        if (eta == 0) continue;
        double lam = 0.1 + 3 * std::abs(uni(rng));
        Complex ww = sqrt_neg_mu(eta, lam);
        CHECK(std::abs(ww * ww + Complex(0.25 * lam * lam, eta)) <
              1e-14 * (1 + std::abs(ww * ww)));
        CHECK(ww.imag() > 0.5 * lam);
    }
    CHECK_THROWS_AS(sqrt_neg_mu(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("c4_constant positivity, asymptote, and brute-force oracle") {
    CHECK(c4_constant(0.5, 0.1) > 0);
    CHECK(c4_constant(3.0, 2.0) > 0);

    // eta0 -> infinity: ratio approaches 1/sqrt(2)
    CHECK(c4_constant(1.0, 1e7) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(2e-3));

    // brute-force oracle: dense geometric scan of the ratio
    auto ratio = [](double eta, double lam) {
        double a = 0.25 * lam * lam;
        double rho = std::hypot(a, eta);
        return (std::sqrt(0.5 * (rho + a)) - 0.5 * lam) / std::sqrt(eta);
    };
    double best = 1e300;
    const int n = 10000000;
    for (int i = 0; i < n; ++i) {
        double eta = std::exp(std::log(1e6) * i / (n - 1.0));
        best = std::min(best, ratio(eta, 1.0));
    }
    CHECK(c4_constant(1.0, 1.0) == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("mode-kernel exponential margin: Im sqrt(-mu) - lambda/2 >= C4 sqrt|eta|") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0, 1);
    for (double lam : {0.5, 1.0, 2.0}) {
        double eta0 = 0.3;
        double c4 = c4_constant(lam, eta0);
        for (int i = 0; i < 300; ++i) {
            double eta = eta0 * std::pow(1e6, uni(rng));
            double margin = sqrt_neg_mu(eta, lam).imag() - 0.5 * lam;
            CHECK(margin >= c4 * std::sqrt(eta) - 1e-12);
        }
    }
}
