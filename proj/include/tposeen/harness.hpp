#ifndef TPOSEEN_HARNESS_HPP
#define TPOSEEN_HARNESS_HPP

#include <string>
#include <vector>

#include "tposeen/farfield.hpp"

namespace tposeen {

/// Sampling geometry: a ray x1 = theta |x| (theta in (-1, 1]) or a wake sheet
/// s(x) = sigma (x1 = sigma - r, |x_perp|^2 = 2 r sigma - sigma^2). Points are
/// taken in the x1-x2 half-plane; axisymmetric scenarios lose nothing.
struct RaySpec {
    enum class Kind { ray, wake_sheet };
    Kind kind = Kind::ray;
    double theta = 1.0;
    double sigma = 1.0;
    std::vector<double> radii;

    void validate() const;
    Vec3 point(double r) const;
    double wake_at(double r) const;  // s(x) along the family
};

struct SampleColumns {
    bool velocity = true;
    bool velocity_gradient = true;
    bool periodic_velocity = true;
    bool periodic_velocity_gradient = true;
    bool vorticity = true;
    bool periodic_vorticity = true;
};

struct SampleRow {
    double param = 0;  // theta or sigma
    double r = 0;
    Vec3 x;
    double s = 0;
    double v_mag = 0, grad_v_mag = 0, w_sup = 0, grad_w_sup = 0, curl_v_mag = 0, curl_w_sup = 0;
    double err_v = 0, err_grad_v = 0, err_w = 0, err_grad_w = 0, err_curl_v = 0, err_curl_w = 0;
    bool flagged = false;
};

struct SampleTable {
    std::vector<SampleRow> rows;
};

/// Far-field samples along the family; sup over nt collocation times for the
/// periodic columns. Rows with |x| <= mask_radius are dropped (exterior-domain
/// masking). Radii must clear the forcing support.
SampleTable sample_quantities(const FarfieldSources& sources, const RaySpec& rays,
                              const SampleColumns& cols = {}, int nt = 16,
                              double mask_radius = 0);

/// Least-squares fit of log m = c - p log r - alpha s over a radius window.
/// Samples with magnitude below 10x their error budget are excluded; on
/// constant-s families alpha is absorbed into c.
struct DecayFitReport {
    std::string quantity;
    double p = 0;
    double alpha = 0;
    double c = 0;
    bool alpha_fitted = false;
    double residual_rms = 0;
    double window_lo = 0, window_hi = 0;
    int samples_used = 0;
    int samples_excluded = 0;
    double max_tail_budget = 0;
};

DecayFitReport fit_decay(const std::vector<double>& r, const std::vector<double>& s,
                         const std::vector<double>& m, const std::vector<double>& budget,
                         double window_lo, double window_hi, bool fit_alpha,
                         const std::string& quantity);

/// Weighted norms of the fixed-point analysis:
/// velnorm = sup |x|(1+s)|v| + (|x|(1+s))^{3/2}|grad v| + sup |x|^3 sup_t|w| + |x|^4 sup_t|grad w|
/// vortnorm = sup |x|^{3/2} e^{K s(x)/(1+S)}|curl v| + |x|^{9/2-eps} e^{K s(x)/(1+S)} sup_t|curl w|
struct WeightedNorms {
    double velnorm = 0;
    double vortnorm = 0;
    double S = 0;
    double epsilon = 0;
    std::string sample_description;
};
WeightedNorms weighted_norms(const SampleTable& samples, double S, double epsilon, double Kconst);

/// L1-in-time norm of grad phi_perp as a reusable kernel kappa(z), tabulated
/// in (|z|, z1/|z|); heat-kernel time images below the route switch radius,
/// mode sums above it.
class VorticityKernelTable {
  public:
    VorticityKernelTable(const FlowParams& params, double r_min, double r_max);
    double operator()(const Vec3& z) const;
    double mass_within(double a) const;

  private:
    FlowParams params_;
    std::vector<double> rg_, cg_;
    std::vector<double> tab_;  // row-major (r, c)
};

/// Convolves the L1-in-time gradient kernel against the synthetic source
/// (1+|y|)^{-source_exponent} e^{-alpha_in s(lambda y)} and fits the algebraic
/// rate on the wake sheet sigma = 1.
DecayFitReport kernel_surrogate_decay(const FlowParams& params, double alpha_in,
                                      const std::vector<double>& radii,
                                      double source_exponent = 4.5);

/// CSV emission with the frozen column order (see README).
std::string sample_table_csv(const SampleTable& table, const std::string& kind);

}  // namespace tposeen

#endif
