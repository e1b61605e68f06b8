#ifndef TPOSEEN_QUADRATURE_HPP
#define TPOSEEN_QUADRATURE_HPP

#include <functional>
#include <string>
#include <vector>

#include "tposeen/geometry.hpp"
#include "tposeen/periodic_kernels.hpp"

namespace tposeen {

/// Declared decay of |kernel(x-y)| * |source(y)| in |y| beyond the
/// integration box; used only to report a domain-truncation tail estimate.
struct DecayModel {
    double algebraic = 4.0;  // (1+|y|)^{-algebraic}
    double exp_rate = 0.0;   // e^{-exp_rate |y|}
    double amplitude = 0.0;  // prefactor; 0 disables the tail estimate
};

/// Refined sub-box of the far-field grid. Fine zones must not overlap each
/// other and are expected to lie inside the base box.
struct Zone {
    Vec3 center;
    double half_length = 0;
    double spacing = 0;
};

struct QuadratureSpec {
    // near-field ball around the singular point y = x, radius
    // min(near_radius, |x|/4); spherical coordinates with the radial map
    // rho = r_n u^2 so kernels up to |z|^{-5/2} integrate smoothly
    double near_radius = 1.0;
    int radial_nodes = 16;
    int polar_nodes = 12;
    int azimuth_nodes = 24;

    // far field: midpoint grid on [-L, L]^3 plus optional fine zones
    double box_half_length = 30.0;
    double spacing = 1.0;
    std::vector<Zone> fine_zones;

    // error estimate from a companion pass at doubled spacings
    bool estimate_error = true;
};

template <typename T>
struct ConvResult {
    T value{};
    double quad_error = 0;
    double tail_error = 0;
    bool converged = true;
};

namespace detail {

inline double value_norm(double v) { return std::abs(v); }
inline double value_norm(const Complex& v) { return std::abs(v); }
inline double value_norm(const Vec3& v) { return v.norm(); }
inline double value_norm(const CVec3& v) { return v.norm(); }
inline double value_norm(const Mat3& v) { return v.frobenius(); }

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Tail of the declared decay model beyond radius L (4 pi int_L^inf r^2 ...).
double tail_integral(const DecayModel& model, double L);

}  // namespace detail

/// Convolution value(x) = int kernel(x-y) source(y) dy over the spec's box,
/// as a single integrand callable f(z, y) with z = x - y. The singularity of
/// the kernel at z = 0 is split off by a quintic partition of unity and
/// integrated in spherical coordinates.
template <typename T, typename F>
ConvResult<T> convolve_r3_integrand(F&& f, const Vec3& x, const QuadratureSpec& spec,
                                    const DecayModel& tail = {}) {
    auto run = [&](const QuadratureSpec& s) -> T {
        const double rn = (x.norm() > 0) ? std::min(s.near_radius, x.norm() / 4.0)
                                         : s.near_radius;
        T acc{};
        // near ball
        if (rn > 0) {
            std::vector<double> un, uw, cn, cw;
            detail::gauss_legendre(s.radial_nodes, un, uw);
            detail::gauss_legendre(s.polar_nodes, cn, cw);
            for (int ir = 0; ir < s.radial_nodes; ++ir) {
                double u = 0.5 * (un[ir] + 1.0);
                double rho = rn * u * u;
                double drho = rn * u * uw[ir];  // d rho = 2 rn u du, GL weight on [-1,1] halved
                if (rho == 0) continue;
                double wcut = 1.0 - smoothstep_quintic(rho, 0.5 * rn, rn);
                if (wcut == 0) continue;
                for (int ic = 0; ic < s.polar_nodes; ++ic) {
                    double ct = cn[ic], st = std::sqrt(std::max(0.0, 1 - ct * ct));
                    for (int ip = 0; ip < s.azimuth_nodes; ++ip) {
                        double ph = 2.0 * M_PI * (ip + 0.5) / s.azimuth_nodes;
                        Vec3 z{rho * ct, rho * st * std::cos(ph), rho * st * std::sin(ph)};
                        double w = rho * rho * drho * cw[ic] * (2.0 * M_PI / s.azimuth_nodes) * wcut;
                        acc += f(z, x - z) * w;
                    }
                }
            }
        }
        // far grid: base box minus fine zones, then fine zones
        auto far_weight = [&](const Vec3& y) {
            if (rn <= 0) return 1.0;
            return smoothstep_quintic((x - y).norm(), 0.5 * rn, rn);
        };
        auto in_zone = [&](const Vec3& y, const Zone& zz) {
            return std::abs(y.x - zz.center.x) <= zz.half_length &&
                   std::abs(y.y - zz.center.y) <= zz.half_length &&
                   std::abs(y.z - zz.center.z) <= zz.half_length;
        };
        auto sweep = [&](const Vec3& c, double half, double h,
                         const std::vector<Zone>* exclude) {
            int n = std::max(1, static_cast<int>(std::llround(2.0 * half / h)));
            double w3 = h * h * h;
            for (int i = 0; i < n; ++i) {
                double yx = c.x - half + (i + 0.5) * h;
                for (int j = 0; j < n; ++j) {
                    double yy = c.y - half + (j + 0.5) * h;
                    for (int k = 0; k < n; ++k) {
                        Vec3 y{yx, yy, c.z - half + (k + 0.5) * h};
                        if (exclude) {
                            bool skip = false;
                            for (const auto& zz : *exclude)
                                if (in_zone(y, zz)) {
                                    skip = true;
                                    break;
                                }
                            if (skip) continue;
                        }
                        double w = far_weight(y);
                        if (w == 0) continue;
                        acc += f(x - y, y) * (w * w3);
                    }
                }
            }
        };
        sweep(Vec3{0, 0, 0}, s.box_half_length, s.spacing, &s.fine_zones);
        for (const auto& zz : s.fine_zones) sweep(zz.center, zz.half_length, zz.spacing, nullptr);
        return acc;
    };

    ConvResult<T> out;
    out.value = run(spec);
    if (spec.estimate_error) {
        QuadratureSpec coarse = spec;
        coarse.spacing *= 2;
        for (auto& zz : coarse.fine_zones) zz.spacing *= 2;
        coarse.radial_nodes = std::max(4, 2 * spec.radial_nodes / 3);
        coarse.polar_nodes = std::max(4, 2 * spec.polar_nodes / 3);
        coarse.azimuth_nodes = std::max(6, 2 * spec.azimuth_nodes / 3);
        T ref = run(coarse);
        out.quad_error = detail::value_norm(out.value - ref);
    }
    out.tail_error = detail::tail_integral(tail, spec.box_half_length);
    return out;
}

/// Scalar kernel against scalar source (the shape used by the lemma verifiers).
ConvResult<double> convolve_r3(const std::function<double(const Vec3&)>& kernel,
                               const std::function<double(const Vec3&)>& source, const Vec3& x,
                               const QuadratureSpec& spec, const DecayModel& tail = {});

/// Space-time convolution on T x R^3 supplied as temporal Fourier modes
/// k = 0..K (negative modes by conjugation): per-mode spatial convolution,
/// then synthesis sum_k e^{i 2 pi k t/T} (kernel_k * source_k)(x).
struct SpacetimeModes {
    // integrand of mode k at (z, y); mode 0 must be real-valued
    std::vector<std::function<CVec3(const Vec3&, const Vec3&)>> mode_integrands;
};
ConvResult<Vec3> convolve_spacetime(const SpacetimeModes& modes, double t, const Vec3& x,
                                    const FlowParams& params, const QuadratureSpec& spec,
                                    const DecayModel& tail = {});

/// Builds per-mode integrands scalar-kernel * vector-source; throws on a
/// mode-count mismatch.
SpacetimeModes make_spacetime_modes(
    const std::vector<std::function<Complex(const Vec3&)>>& kernels,
    const std::vector<std::function<CVec3(const Vec3&)>>& sources);

/// Sup-ratio reports for the convolution lemmas.
struct VerifierPoint {
    Vec3 x;
    double value = 0;
    double shape = 0;   // claimed bound shape at x
    double ratio = 0;   // value / shape
    double quad_error = 0;
    double tail_error = 0;
};
struct VerifierReport {
    std::string name;
    bool hypothesis_ok = true;
    double sup_ratio = 0;
    std::vector<VerifierPoint> points;
};

/// |D^alpha Gamma0| * g with g = M (1+|y|)^{-A} (1+s(y))^{-B}, along the wake
/// axis and an off-axis ray; reports sup of value / [(1+|x|)(1+s(lambda x))]^{-1-|alpha|/2}.
VerifierReport verify_farwig(double A, double B, int deriv_order, const FlowParams& params,
                             const std::vector<double>& radii);

/// int |x-y|^{-A} e^{-alpha|x-y|} (1+|y|)^{-B} dy, reported times (1+|x|)^B.
VerifierReport verify_conv_exp(double A, double B, double alpha,
                               const std::vector<double>& radii);

/// Doubly wake-weighted convolution with kernel [(1+|z|)(1+s(z))]^{-3/2},
/// reported times (1+|x|)^{3/2}. Requires A in (2,inf), A+min(1,B) > 3.
VerifierReport verify_wake_conv(double A, double B, const std::vector<double>& radii);

/// Samples the two exponential shift inequalities; a negative margin is a
/// violation. Margins are evaluated in log form.
struct ExpShiftReport {
    int samples = 0;
    int violations = 0;
    double min_margin_wake = 0;
    double min_margin_abs = 0;
};
ExpShiftReport verify_exp_shift(double a, double S, int n_samples, std::uint64_t seed = 2024);

}  // namespace tposeen

#endif
