#include <cmath>

#include "doctest.h"
#include "tposeen/quadrature.hpp"
#include "tposeen/steady_kernels.hpp"
#include "tposeen/wake.hpp"

using namespace tposeen;

namespace {

const FlowParams unit_flow{1.0, 2 * M_PI};

double ball_indicator(const Vec3& y) { return y.norm() <= 1.0 ? 1.0 : 0.0; }
double newton_kernel(const Vec3& z) { return 1.0 / (4 * M_PI * z.norm()); }

double radial_bump(const Vec3& y) {
    double r2 = y.norm2();
    return r2 < 1.0 ? std::pow(1.0 - r2, 4) : 0.0;
}

}  // namespace

TEST_CASE("Newton potential oracle: indicator ball at |x| = 2 gives 1/6") {
    QuadratureSpec spec;
    spec.box_half_length = 1.3;
    spec.spacing = 0.01;
    spec.estimate_error = false;
    auto res = convolve_r3(newton_kernel, ball_indicator, {2, 0, 0}, spec);
    CHECK(res.value == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
}

TEST_CASE("zero source gives exactly zero with zero error") {
    QuadratureSpec spec;
    spec.box_half_length = 4;
    spec.spacing = 0.25;
    auto res = convolve_r3(newton_kernel, [](const Vec3&) { return 0.0; }, {1, 1, 0}, spec);
    CHECK(res.value == 0.0);
    CHECK(res.quad_error == 0.0);
}

TEST_CASE("phi0 kernel against a radial bump is axisymmetric about e1") {
    QuadratureSpec spec;
    spec.box_half_length = 1.5;
    spec.spacing = 0.05;
    spec.radial_nodes = 20;
    spec.polar_nodes = 16;
    spec.azimuth_nodes = 32;
    auto kernel = [](const Vec3& z) { return phi0(z, unit_flow); };
    auto a = convolve_r3(kernel, radial_bump, {0.5, 2.0, 0.0}, spec);
    auto b = convolve_r3(kernel, radial_bump, {0.5, 0.0, 2.0}, spec);
    auto c = convolve_r3(kernel, radial_bump, {0.5, std::sqrt(2.0), std::sqrt(2.0)}, spec);
    double tol = 2 * (a.quad_error + b.quad_error) + 1e-10;
    CHECK(std::abs(a.value - b.value) < tol);
    CHECK(std::abs(a.value - c.value) < tol);
}

TEST_CASE("quadrature error estimates are sound on the standard battery") {
    // halving the spacing moves the result by less than the reported estimate
    QuadratureSpec spec;
    spec.box_half_length = 1.3;
    spec.spacing = 0.04;
    auto r1 = convolve_r3(newton_kernel, radial_bump, {2, 0, 0}, spec);
    QuadratureSpec fine = spec;
    fine.spacing = 0.02;
    fine.estimate_error = false;
    auto r2 = convolve_r3(newton_kernel, radial_bump, {2, 0, 0}, fine);
    CHECK(std::abs(r1.value - r2.value) <= r1.quad_error + 1e-12);

    QuadratureSpec spec2;
    spec2.box_half_length = 2.0;
    spec2.spacing = 0.08;
    auto kernel = [](const Vec3& z) { return phi0(z, unit_flow); };
    auto s1 = convolve_r3(kernel, radial_bump, {0.4, 0.7, 0}, spec2);
    QuadratureSpec fine2 = spec2;
    fine2.spacing = 0.04;
    fine2.radial_nodes *= 2;
    fine2.polar_nodes *= 2;
    fine2.azimuth_nodes *= 2;
    fine2.estimate_error = false;
    auto s2 = convolve_r3(kernel, radial_bump, {0.4, 0.7, 0}, fine2);
    CHECK(std::abs(s1.value - s2.value) <= s1.quad_error + 1e-12);
}

TEST_CASE("convolve_spacetime: mode-0 reduction, averaging, linearity") {
    QuadratureSpec spec;
    spec.box_half_length = 1.2;
    spec.spacing = 0.06;
    spec.estimate_error = false;

    std::vector<std::function<Complex(const Vec3&)>> kernels = {
        [](const Vec3& z) { return Complex(newton_kernel(z), 0.0); }};
    std::vector<std::function<CVec3(const Vec3&)>> sources = {
        [](const Vec3& y) { return CVec3{Complex(radial_bump(y), 0), 0, 0}; }};
    auto modes = make_spacetime_modes(kernels, sources);
    Vec3 x{0, 2, 0};
    auto st = convolve_spacetime(modes, 0.3, x, unit_flow, spec);
    auto direct = convolve_r3(newton_kernel, radial_bump, x, spec);
    CHECK(st.value.x == doctest::Approx(direct.value).epsilon(1e-12));
    CHECK(st.value.y == doctest::Approx(0.0).epsilon(1e-14));

    // add a k=1 mode; the time average over a period equals the k=0 part
    kernels.push_back(
        [](const Vec3& z) { return gamma_H(z, unit_flow.mode_frequency(1), unit_flow); });
    sources.push_back([](const Vec3& y) {
        return CVec3{Complex(0.3, 0.4) * radial_bump(y), Complex(0.1, -0.2) * radial_bump(y), 0};
    });
    auto modes2 = make_spacetime_modes(kernels, sources);
    Vec3 avg;
    int nt = 16;
    for (int i = 0; i < nt; ++i)
        avg += convolve_spacetime(modes2, unit_flow.period * i / nt, x, unit_flow, spec).value;
    avg = avg / nt;
    CHECK(std::abs(avg.x - direct.value) < 1e-10);
    CHECK(std::abs(avg.y) < 1e-10);

    // linearity in the source
    auto sources3 = sources;
    sources3[1] = [&](const Vec3& y) {
        CVec3 v = sources[1](y);
        return v * 2.5;
    };
    auto modes3 = make_spacetime_modes(kernels, sources3);
    auto v1 = convolve_spacetime(modes2, 0.7, x, unit_flow, spec).value;
    auto v0 = convolve_spacetime(modes, 0.7, x, unit_flow, spec).value;
    auto v3 = convolve_spacetime(modes3, 0.7, x, unit_flow, spec).value;
    // v3 - v0 = 2.5 (v1 - v0)
    for (int d = 0; d < 3; ++d)
        CHECK(v3[d] - v0[d] == doctest::Approx(2.5 * (v1[d] - v0[d])).epsilon(1e-12));

    std::vector<std::function<CVec3(const Vec3&)>> short_sources(1, sources[0]);
    CHECK_THROWS_AS(make_spacetime_modes(kernels, short_sources), std::invalid_argument);
}

TEST_CASE("convolve_spacetime single mode matches direct double quadrature") {
    QuadratureSpec spec;
    spec.box_half_length = 1.2;
    spec.spacing = 0.06;
    spec.estimate_error = false;
    std::vector<std::function<Complex(const Vec3&)>> kernels = {
        [](const Vec3&) { return Complex(0, 0); },
        [](const Vec3& z) { return gamma_H(z, unit_flow.mode_frequency(1), unit_flow); }};
    const Complex amp(0.8, -0.5);
    std::vector<std::function<CVec3(const Vec3&)>> sources = {
        [](const Vec3&) { return CVec3{}; },
        [&](const Vec3& y) { return CVec3{amp * radial_bump(y), 0, 0}; }};
    auto modes = make_spacetime_modes(kernels, sources);
    Vec3 x{0.5, 2.2, 0};

    // oracle: time-domain kernel/source and trapezoidal double quadrature
    auto Kt = [&](double t, const Vec3& z) {
        return 2.0 * std::real(std::polar(1.0, unit_flow.mode_frequency(1) * t) *
                               gamma_H(z, unit_flow.mode_frequency(1), unit_flow));
    };
    auto St = [&](double t, const Vec3& y) {
        return 2.0 * std::real(std::polar(1.0, unit_flow.mode_frequency(1) * t) * amp) *
               radial_bump(y);
    };
    const int ns = 32;
    const double h = 0.08;
    for (int it = 0; it < 8; ++it) {
        double t = unit_flow.period * it / 8.0;
        double oracle = 0;
        for (int is = 0; is < ns; ++is) {
            double s = unit_flow.period * is / ns;
            double spatial = 0;
            int n = static_cast<int>(2.4 / h);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) {
                        Vec3 y{-1.2 + (i + 0.5) * h, -1.2 + (j + 0.5) * h, -1.2 + (k + 0.5) * h};
                        double sv = St(s, y);
                        if (sv == 0) continue;
                        spatial += Kt(t - s, x - y) * sv;
                    }
            oracle += spatial * h * h * h / ns;  // normalized Haar measure in time
        }
        auto got = convolve_spacetime(modes, t, x, unit_flow, spec).value.x;
        CHECK(got == doctest::Approx(oracle).epsilon(1e-4));
    }
}

TEST_CASE("verify_conv_exp: finiteness, x = 0, monotone in alpha") {
    auto rep = verify_conv_exp(2.5, 4.5, 0.5, {0.0, 3.0, 6.0});
    CHECK(rep.points.size() == 3);
    for (auto& p : rep.points) {
        CHECK(std::isfinite(p.value));
        CHECK(p.value > 0);
    }
    auto rep2 = verify_conv_exp(2.5, 4.5, 2.0, {3.0});
    auto rep1 = verify_conv_exp(2.5, 4.5, 0.5, {3.0});
    CHECK(rep2.points[0].value < rep1.points[0].value);
    CHECK_THROWS_AS(verify_conv_exp(3.5, 1.0, 1.0, {1.0}), std::invalid_argument);
}

TEST_CASE("verify_farwig and verify_wake_conv: finite sups, hypothesis flags") {
    auto fw = verify_farwig(3.0, 1.0, 0, unit_flow, {4.0, 8.0});
    CHECK(fw.hypothesis_ok);
    CHECK(std::isfinite(fw.sup_ratio));
    CHECK(fw.sup_ratio > 0);
    auto fw2 = verify_farwig(2.0, 0.0, 0, unit_flow, {4.0});
    CHECK_FALSE(fw2.hypothesis_ok);

    auto wc1 = verify_wake_conv(2.5, 1.0, {4.0, 8.0});
    CHECK(std::isfinite(wc1.sup_ratio));
    auto wc2 = verify_wake_conv(3.0, 1.0, {4.0, 8.0});
    CHECK(wc2.sup_ratio <= wc1.sup_ratio * 1.0000001);  // larger A: pointwise smaller
}

TEST_CASE("exponential shift inequalities: sampled margins stay nonnegative") {
    auto rep = verify_exp_shift(1.0, 2.0, 100000, 2024);
    CHECK(rep.violations == 0);
    CHECK(rep.min_margin_wake >= 0);
    CHECK(rep.min_margin_abs >= 0);
    // y = 0 and x = 0 corner cases
    CHECK(4.0 * 1.0 + wake({-3, 0, 0}) - wake({-3, 0, 0}) / 3.0 >= 0);
    auto rep2 = verify_exp_shift(0.5, 5.0, 20000, 7);
    CHECK(rep2.violations == 0);
}
