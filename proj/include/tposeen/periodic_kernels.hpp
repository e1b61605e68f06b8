#ifndef TPOSEEN_PERIODIC_KERNELS_HPP
#define TPOSEEN_PERIODIC_KERNELS_HPP

#include <string>
#include <vector>

#include "tposeen/geometry.hpp"

namespace tposeen {

/// Fundamental solution of i eta v - Delta v - lambda d1 v = f:
/// Gamma_H(x) = e^{i sqrt(-mu) |x| - (lambda/2) x1} / (4 pi |x|).
Complex gamma_H(const Vec3& x, double eta, const FlowParams& params);

/// Analytic gradient of gamma_H.
CVec3 grad_gamma_H(const Vec3& x, double eta, const FlowParams& params);

/// Computable bound on the tail sum_{|k|>K} of the purely periodic kernel
/// series at radius |x|, by integral comparison against e^{-C4 sqrt(eta_k)|x|}.
struct TruncationCertificate {
    int K_used = 0;
    double tail_bound = 0;
    std::string basis;
};

/// C4/C5/C3/K bundle for given flow parameters. C4 is computed from the
/// branch geometry at eta0 = 2*pi/period; C5 = sqrt(pi/period) C4 / 2;
/// C3 is adopted as C5; K = min(lambda, C3)/4.
struct ConstantsRecord {
    double C4 = 0, C5 = 0, C3 = 0, K = 0;
};

ConstantsRecord constants_record(const FlowParams& params);

/// Temporal Fourier modes k = 1..K of phi_perp at x, truncated so the
/// certified tail is <= tol. Mode -k is the conjugate. K_hard caps the
/// truncation; exceeding it throws.
struct PhiPerpModes {
    std::vector<Complex> modes;  // modes[k-1] = Gamma_H^{(k)}(x)
    TruncationCertificate cert;
};
PhiPerpModes phi_perp_modes(const Vec3& x, const FlowParams& params, double tol,
                            int K_hard = 200000);

struct GradPhiPerpModes {
    std::vector<CVec3> modes;
    TruncationCertificate cert;
};
GradPhiPerpModes grad_phi_perp_modes(const Vec3& x, const FlowParams& params, double tol,
                                     int K_hard = 200000);

/// phi_perp(t,x) = sum_{0<|k|<=K} e^{i (2 pi/T) k t} Gamma_H^{(k)}(x), real by
/// conjugate pairing.
struct PhiPerpValue {
    double value = 0;
    TruncationCertificate cert;
};
PhiPerpValue phi_perp(double t, const Vec3& x, const FlowParams& params, double tol);

struct GradPhiPerpValue {
    Vec3 value;
    TruncationCertificate cert;
};
GradPhiPerpValue grad_phi_perp(double t, const Vec3& x, const FlowParams& params, double tol);

enum class PeriodicKernelId { phi_perp, grad_phi_perp };

/// L^q norm in time over one period with the normalized measure dt/T,
/// trapezoidal with doubling until the relative change is <= 1e-6.
double lq_time_norm(PeriodicKernelId id, const Vec3& x, double q, const FlowParams& params);

/// sup over a log grid |eta| in [1/2, 1e4] of |m| + |eta dm/deta| for the
/// multiplier m_{alpha,x}(eta) = chi(eta) |eta|^gamma D^alpha Gamma_H^{2 pi eta/T}(x),
/// with analytic eta-derivatives. normalized = sup * |x|^{1+|alpha|+2 gamma} e^{C5 |x|}.
struct MultiplierReport {
    double sup = 0;
    double normalized = 0;
    double argmax_eta = 0;
    int grid_points = 0;
};
MultiplierReport multiplier_diag(int alpha_order, const Vec3& x, double gamma,
                                 const FlowParams& params);

/// Purely periodic velocity mode kernel (experimental accuracy class,
/// target 1e-2 relative): Gamma_perp^{(k)}_{jl} = delta_jl Gamma_H + d_j d_l Psi
/// with Psi the Newton potential of Gamma_H. Returned with an error estimate.
struct GammaPerpModeResult {
    std::array<Complex, 9> tensor{};  // row-major
    double error_estimate = 0;
    Complex& at(int j, int l) { return tensor[3 * j + l]; }
    const Complex& at(int j, int l) const { return tensor[3 * j + l]; }
};
GammaPerpModeResult gamma_perp_mode(int k, const Vec3& x, const FlowParams& params,
                                    double tol = 1e-2);

/// Quintic smoothstep: 0 below lo, 1 above hi.
double smoothstep_quintic(double v, double lo, double hi);

}  // namespace tposeen

#endif
