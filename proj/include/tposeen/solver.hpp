#ifndef TPOSEEN_SOLVER_HPP
#define TPOSEEN_SOLVER_HPP

#include <optional>
#include <vector>

#include "tposeen/grid.hpp"

namespace tposeen {

/// Compactly supported forcing: bump profile (1-|x/rho|^2)^4 inside |x| < rho,
/// times per-mode complex amplitudes and directions (Hermitian extension to
/// negative modes makes the forcing real).
struct ForcingSpec {
    Vec3 center{0, 0, 0};
    double rho = 1.0;
    double amplitude = 1.0;
    std::vector<Complex> coeffs;    // c_k, k = 0..K_f
    std::vector<Vec3> directions;   // unit directions per mode

    void validate() const;
    double profile(const Vec3& x) const;
    /// physical-space mode k of the forcing at x (zero beyond the band)
    CVec3 mode_value(int k, const Vec3& x) const;
    double support_radius() const { return rho; }
};

/// Time-periodic velocity field as physical-space temporal Fourier modes
/// k = 0..k_max; mode -k is the conjugate of mode k. Component-major layout:
/// modes[k][c*N^3 + idx].
struct TimePeriodicField {
    GridSpec grid;
    double lambda = 1;
    double period = 2 * M_PI;
    int k_max = 0;
    std::vector<std::vector<Complex>> modes;

    std::size_t nn() const { return grid.nodes(); }
    Complex& at(int k, int c, std::size_t idx) { return modes[k][c * nn() + idx]; }
    const Complex& at(int k, int c, std::size_t idx) const { return modes[k][c * nn() + idx]; }
    /// synthesize the real field at grid node idx and time t
    Vec3 value_at(double t, std::size_t idx) const;
    double mode_norm(int k) const;
    double total_norm() const;
};

/// One Fourier-mode solve: u_hat = (I - xi xi^T/|xi|^2) f_hat / (|xi|^2 - i lambda xi_1
/// + i 2 pi k/T) on the lattice, with the stated zero-frequency rule. Input and
/// output are physical-space grids (component-major, 3 N^3 values).
std::vector<Complex> solve_mode(int k, const std::vector<Complex>& forcing_mode,
                                const FlowParams& params, const GridSpec& grid);

/// All modes of the linear problem. Optional wrap-around estimate: solve again
/// at half resolution on a doubled box and difference inside |x| <= L/3.
struct LinearSolveReport {
    double wraparound_estimate = -1;  // -1 when not requested
};
TimePeriodicField solve_linear(const ForcingSpec& f, const FlowParams& params,
                               const GridSpec& grid, int k_max,
                               LinearSolveReport* report = nullptr,
                               bool estimate_wraparound = false);

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 30;
    double amplitude_guard = 0.5;
    int collocation_times = 0;  // 0: use 4*k_max+1
};

struct PicardHistory {
    std::vector<double> rel_change;
    bool converged = false;
    bool diverged = false;
    int iterations = 0;
};

/// Picard iteration u <- Gamma * (f - curl u ^ u), pseudo-spectral quadratic
/// term with 2/3-rule spatial dealiasing and exact temporal collocation.
TimePeriodicField picard_solve(const ForcingSpec& f, const FlowParams& params,
                               const GridSpec& grid, int k_max, const PicardOptions& opts,
                               PicardHistory* history = nullptr);

/// P / P_perp split: steady part (mode 0) and purely periodic remainder.
struct ProjectedParts {
    std::vector<Complex> steady;      // mode 0 (real up to rounding)
    TimePeriodicField purely_periodic;  // modes 1..k_max, mode 0 zeroed
};
ProjectedParts project_parts(const TimePeriodicField& u);

/// Max spectral divergence over modes (diagnostic; solved fields give ~1e-12).
double max_spectral_divergence(const TimePeriodicField& u);

/// |int grad v : grad v - int Pf . v| / |int grad v : grad v| for the steady mode.
double energy_identity_residual(const TimePeriodicField& u, const ForcingSpec& f);

/// Physical-space modes of the nonlinearity A(u) = -curl u ^ u and of curl u.
struct NonlinearModes {
    std::vector<std::vector<Complex>> a_modes;     // k = 0..k_max
    std::vector<std::vector<Complex>> curl_modes;  // k = 0..k_max
};
NonlinearModes nonlinear_source_modes(const TimePeriodicField& u);

/// curl u modes only (spectral curl, returned in physical space).
std::vector<std::vector<Complex>> curl_field_modes(const TimePeriodicField& u);

}  // namespace tposeen

#endif
