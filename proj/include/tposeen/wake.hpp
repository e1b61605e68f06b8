#ifndef TPOSEEN_WAKE_HPP
#define TPOSEEN_WAKE_HPP

#include "tposeen/geometry.hpp"

namespace tposeen {

/// Wake weight s(x) = |x| + x1. Vanishes exactly on the nonpositive x1-axis,
/// is O(|x_perp|^2/|x|) inside the wake paraboloid and comparable to 2|x|
/// opposite to it. Computed in the compensated form (x2^2+x3^2)/(|x|-x1)
/// when x1 < 0 so the wake region keeps full relative precision.
double wake(const Vec3& x);

/// Gradient of s; |grad s|^2 = 2 s(x)/|x|.
Vec3 wake_gradient(const Vec3& x);

/// ein(z) = int_0^z (1 - e^{-tau})/tau dtau for z >= 0.
/// Power series below z = 30 (compensated summation), gamma + log z + E1(z)
/// above. Absolute error <= 1e-12 on [0, 700].
double ein(double z);

/// ein'(z) = (1 - e^{-z})/z, with the removable limit 1 at z = 0.
double ein_d1(double z);
/// ein''(z).
double ein_d2(double z);
/// ein'''(z).
double ein_d3(double z);

/// Exponential integral E1(z) for z > 0 (continued fraction for large z,
/// series otherwise).
double expint_e1(double z);

/// Square root of -mu, mu = (lambda/2)^2 + i*eta, on the branch with
/// nonnegative imaginary part. Requires eta != 0; the k = 0 mode is served
/// by the steady kernels. Im(result) > lambda/2 always.
Complex sqrt_neg_mu(double eta, double lambda);

/// Infimum over |eta| in [eta0, 1e6*eta0] of (Im sqrt(-mu) - lambda/2)/sqrt|eta|,
/// taken on a geometric grid with local refinement around the minimizer.
/// This is the constant C4 of the per-mode kernel bound
/// |Gamma_H(x)| <= C |x|^{-1} e^{-C4 sqrt|eta| |x|}.
double c4_constant(double lambda, double eta0);

}  // namespace tposeen

#endif
