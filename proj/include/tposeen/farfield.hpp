#ifndef TPOSEEN_FARFIELD_HPP
#define TPOSEEN_FARFIELD_HPP

#include <array>
#include <vector>

#include "tposeen/solver.hpp"

namespace tposeen {

/// Grid sources for the representation formulas. Stores the nonlinearity
/// modes A_k(u) (of -curl u ^ u) on the grid; the full source
/// g_k = f_k + A_k adds the forcing analytically at evaluation points.
/// q_k = Gamma_H^{(k)} * div g_k are the auxiliary scalars of the
/// periodic-velocity Helmholtz split. Boundary-shell magnitudes feed the
/// declared tail models.
struct FarfieldSources {
    GridSpec grid;
    double lambda = 1;
    double period = 2 * M_PI;
    int k_max = 0;
    ForcingSpec forcing;
    std::vector<std::vector<Complex>> a_modes;  // k = 0..k_max, 3 components
    std::vector<std::vector<Complex>> q_modes;  // k = 1..k_max, scalar
    double shell_g0 = 0;
    double shell_gk = 0;
    double shell_qk = 0;

    FlowParams params() const { return FlowParams(lambda, period); }
};

FarfieldSources prepare_farfield_sources(const TimePeriodicField& u, const ForcingSpec& f);

struct FarValue {
    Vec3 value;
    double quad_error = 0;
    double tail_error = 0;
};
struct FarMat {
    Mat3 value;  // (m, j) = d_m v_j
    double quad_error = 0;
    double tail_error = 0;
};
struct FarModeValues {
    std::vector<CVec3> modes;  // k = 1..k_max
    double quad_error = 0;
    double tail_error = 0;

    Vec3 synthesize(double period, double t) const;
    double sup_over_times(double period, int nt = 16) const;
};
struct FarModeMats {
    std::vector<std::array<Complex, 9>> modes;  // (m, j) = d_m w_j
    double quad_error = 0;
    double tail_error = 0;
    double sup_over_times(double period, int nt = 16) const;
};

/// v(x) = int Gamma0(x-y) g0(y) dy.
FarValue eval_velocity_farfield_steady(const Vec3& x, const FarfieldSources& s);

/// grad v via grad Gamma0.
FarMat eval_grad_velocity_farfield_steady(const Vec3& x, const FarfieldSources& s);

/// curl v(x) = int grad phi0(x-y) ^ g0(y) dy.
FarValue eval_curl_steady_farfield(const Vec3& x, const FarfieldSources& s);

/// Modes of curl w: int grad Gamma_H^{(k)}(x-y) ^ g_k(y) dy.
FarModeValues eval_curl_periodic_farfield(const Vec3& x, const FarfieldSources& s);

/// Modes of w via the split w_k = Gamma_H^{(k)} * g_k + grad N * q_k
/// (grad N from the Newton potential; the second term carries the
/// nonlocal pressure-type far field).
FarModeValues eval_velocity_periodic_farfield(const Vec3& x, const FarfieldSources& s);

/// Modes of grad w: d_m w_j = d_m Gamma_H * g_j + PV(d_m d_j N * q) - delta_mj q/3.
FarModeMats eval_grad_velocity_periodic_farfield(const Vec3& x, const FarfieldSources& s);

/// Vorticity via both representation formulas, periodic part synthesized at t.
struct VorticityEval {
    Vec3 curl_steady;
    Vec3 curl_periodic;
    double quad_error = 0;
    double tail_error = 0;
};
VorticityEval eval_vorticity_farfield(const Vec3& x, double t, const FarfieldSources& s);

/// chi_S cutoff: 1 on |x| <= 5S/4, 0 on |x| >= 7S/4, quintic in between.
struct CutoffSpec {
    double S = 2;
    double S0 = 1;
    double chi(double r) const;
};

/// H_S / F_S split at (t, x): H_S convolves chi_S (f + A(u)), F_S convolves
/// (1 - chi_S) A(u). Periodic velocity parts are skipped (no closed-form
/// kernel); steady velocity and both vorticity parts are evaluated.
/// Evaluation requires |x| > S.
struct SplitParts {
    Vec3 vel_steady_H, vel_steady_F;
    Vec3 curl_steady_H, curl_steady_F;
    Vec3 curl_periodic_H, curl_periodic_F;
    bool periodic_velocity_skipped = true;
    double quad_error = 0;
};
SplitParts compute_Hs_Fs(const Vec3& x, double t, const FarfieldSources& s,
                         const CutoffSpec& cutoff);

/// Exact lookups on the solved grid (x must be a grid node).
Vec3 field_value_at_node(const TimePeriodicField& u, const Vec3& node, double t);
Vec3 curl_value_at_node(const std::vector<std::vector<Complex>>& curl_modes, const GridSpec& g,
                        double period, const Vec3& node, double t);

}  // namespace tposeen

#endif
