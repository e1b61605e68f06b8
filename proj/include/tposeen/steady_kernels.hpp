#ifndef TPOSEEN_STEADY_KERNELS_HPP
#define TPOSEEN_STEADY_KERNELS_HPP

#include <cstdint>
#include <string>

#include "tposeen/geometry.hpp"

namespace tposeen {

/// Scalar Oseen potential Phi(x) = ein(s(lambda x)/2) / (4 pi lambda).
/// Its Hessian builds the velocity tensor; Delta Phi equals phi0.
double oseen_potential(const Vec3& x, const FlowParams& params);

/// Steady Oseen velocity tensor Gamma0_{jl} = (delta_{jl} Delta - d_j d_l) Phi,
/// in closed form. Symmetric; rows are divergence-free away from the origin.
Mat3 gamma0(const Vec3& x, const FlowParams& params);

/// grad Gamma0; component (m, j, l) = d_m Gamma0_{jl}.
Tensor3x3x3 grad_gamma0(const Vec3& x, const FlowParams& params);

/// Steady vorticity kernel phi0(x) = e^{-s(lambda x)/2} / (4 pi |x|).
double phi0(const Vec3& x, const FlowParams& params);

/// grad phi0, analytic.
Vec3 grad_phi0(const Vec3& x, const FlowParams& params);

struct SampleSpec {
    std::uint64_t seed = 1;
    int count = 10000;
    double r_min = 0.5;
    double r_max = 100.0;
};

/// Empirical constant of the anisotropic bound
/// |D^alpha Gamma0(x)| <= C [|x| (1 + s(lambda x))]^{-1-|alpha|/2}.
struct KernelBoundReport {
    std::string bound_shape;
    std::string sample_description;
    double empirical_constant = 0;   // sup over samples, |alpha| in {0,1}
    double empirical_constant_a0 = 0;
    double empirical_constant_a1 = 0;
};

KernelBoundReport verify_gamma0_bounds(const FlowParams& params, const SampleSpec& spec);

}  // namespace tposeen

#endif
