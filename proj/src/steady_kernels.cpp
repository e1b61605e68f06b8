#include "tposeen/steady_kernels.hpp"

#include <random>
#include <stdexcept>

#include "tposeen/wake.hpp"

namespace tposeen {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

void require_nonzero(const Vec3& x, const char* who) {
    if (x.x == 0 && x.y == 0 && x.z == 0)
        throw std::invalid_argument(std::string(who) + ": x = 0 is singular");
}

}  // namespace

double oseen_potential(const Vec3& x, const FlowParams& params) {
    require_nonzero(x, "oseen_potential");
    const double sigma = 0.5 * params.lambda * wake(x);
    return ein(sigma) / (kFourPi * params.lambda);
}

double phi0(const Vec3& x, const FlowParams& params) {
    require_nonzero(x, "phi0");
    const double sigma = 0.5 * params.lambda * wake(x);
    return std::exp(-sigma) / (kFourPi * x.norm());
}

Vec3 grad_phi0(const Vec3& x, const FlowParams& params) {
    require_nonzero(x, "grad_phi0");
    const double r = x.norm();
    const double sigma = 0.5 * params.lambda * wake(x);
    const Vec3 gs = wake_gradient(x);  // grad of s(x); grad sigma = (lambda/2) gs
    const double e = std::exp(-sigma) / kFourPi;
    return -e * (x / (r * r * r) + (0.5 * params.lambda / r) * gs);
}

Mat3 gamma0(const Vec3& x, const FlowParams& params) {
    require_nonzero(x, "gamma0");
    const double lam = params.lambda;
    const double r = x.norm();
    const double sigma = 0.5 * lam * wake(x);
    const double f1 = ein_d1(sigma);
    const double f2 = ein_d2(sigma);

    // sigma_j = (lam/2)(x_j/r + e1_j), sigma_jl = (lam/2)(delta_jl/r - x_j x_l / r^3)
    Vec3 sg = wake_gradient(x) * (0.5 * lam);
    const double c = 0.5 * lam;
    Mat3 out;
    const double ph0 = std::exp(-sigma) / (kFourPi * r);
    for (int j = 0; j < 3; ++j) {
        for (int l = j; l < 3; ++l) {
            double sjl = c * ((j == l ? 1.0 / r : 0.0) - x[j] * x[l] / (r * r * r));
            double hess = (f2 * sg[j] * sg[l] + f1 * sjl) / (kFourPi * lam);
            double v = (j == l ? ph0 : 0.0) - hess;
            out(j, l) = v;
            out(l, j) = v;
        }
    }
    return out;
}

Tensor3x3x3 grad_gamma0(const Vec3& x, const FlowParams& params) {
    require_nonzero(x, "grad_gamma0");
    const double lam = params.lambda;
    const double r = x.norm();
    const double r3 = r * r * r, r5 = r3 * r * r;
    const double sigma = 0.5 * lam * wake(x);
    const double f1 = ein_d1(sigma);
    const double f2 = ein_d2(sigma);
    const double f3 = ein_d3(sigma);
    const Vec3 sg = wake_gradient(x) * (0.5 * lam);
    const Vec3 gph = grad_phi0(x, params);
    const double c = 0.5 * lam;

    auto d = [](int i, int j) { return i == j ? 1.0 : 0.0; };
    Tensor3x3x3 out;
    for (int m = 0; m < 3; ++m) {
        for (int j = 0; j < 3; ++j) {
            for (int l = 0; l < 3; ++l) {
                double sjl = c * (d(j, l) / r - x[j] * x[l] / r3);
                double sjm = c * (d(j, m) / r - x[j] * x[m] / r3);
                double slm = c * (d(l, m) / r - x[l] * x[m] / r3);
                double sjlm = c * (-(d(j, l) * x[m] + d(j, m) * x[l] + d(l, m) * x[j]) / r3 +
                                   3.0 * x[j] * x[l] * x[m] / r5);
                double hess3 = (f3 * sg[j] * sg[l] * sg[m] +
                                f2 * (sjm * sg[l] + sg[j] * slm + sjl * sg[m]) +
                                f1 * sjlm) /
                               (kFourPi * lam);
                out(m, j, l) = d(j, l) * gph[m] - hess3;
            }
        }
    }
    return out;
}

KernelBoundReport verify_gamma0_bounds(const FlowParams& params, const SampleSpec& spec) {
    if (spec.count <= 0) throw std::invalid_argument("verify_gamma0_bounds: empty sample set");
    if (!(spec.r_min > 0)) throw std::invalid_argument("verify_gamma0_bounds: r_min must exclude the origin");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double sup0 = 0, sup1 = 0;
    for (int i = 0; i < spec.count; ++i) {
        // log-uniform radius, uniform direction
        double r = spec.r_min * std::pow(spec.r_max / spec.r_min, uni(rng));
        double ct = 2 * uni(rng) - 1;
        double ph = 2 * M_PI * uni(rng);
        double st = std::sqrt(std::max(0.0, 1 - ct * ct));
        Vec3 x{r * ct, r * st * std::cos(ph), r * st * std::sin(ph)};
        double shape = x.norm() * (1.0 + params.lambda * wake(x));
        sup0 = std::max(sup0, gamma0(x, params).frobenius() * shape);
        sup1 = std::max(sup1, grad_gamma0(x, params).frobenius() * std::pow(shape, 1.5));
    }
    KernelBoundReport rep;
    rep.bound_shape = "[|x|(1+s(lambda x))]^{-1-|alpha|/2}";
    rep.sample_description = std::to_string(spec.count) + " log-uniform samples, |x| in [" +
                             std::to_string(spec.r_min) + ", " + std::to_string(spec.r_max) + "]";
    rep.empirical_constant_a0 = sup0;
    rep.empirical_constant_a1 = sup1;
    rep.empirical_constant = std::max(sup0, sup1);
    return rep;
}

}  // namespace tposeen
