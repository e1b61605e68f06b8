#include "tposeen/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "tposeen/parallel.hpp"

namespace tposeen {

void ForcingSpec::validate() const {
    if (!(rho > 0)) throw std::invalid_argument("ForcingSpec: support radius must be positive");
    if (coeffs.empty()) throw std::invalid_argument("ForcingSpec: at least the steady coefficient required");
    if (coeffs.size() != directions.size())
        throw std::invalid_argument("ForcingSpec: coeffs and directions must have equal length");
    if (std::abs(coeffs[0].imag()) > 1e-14)
        throw std::invalid_argument("ForcingSpec: steady coefficient must be real (real forcing)");
}

double ForcingSpec::profile(const Vec3& x) const {
    const double r2 = (x - center).norm2() / (rho * rho);
    if (r2 >= 1.0) return 0.0;
    const double b = 1.0 - r2;
    return b * b * b * b;
}

CVec3 ForcingSpec::mode_value(int k, const Vec3& x) const {
    int ak = std::abs(k);
    if (ak >= static_cast<int>(coeffs.size())) return {};
    Complex c = amplitude * coeffs[ak] * profile(x);
    if (k < 0) c = std::conj(amplitude * coeffs[ak]) * profile(x);
    return CVec3(directions[ak]) * c;
}

Vec3 TimePeriodicField::value_at(double t, std::size_t idx) const {
    const std::size_t n3 = nn();
    Vec3 v{modes[0][idx].real(), modes[0][n3 + idx].real(), modes[0][2 * n3 + idx].real()};
    for (int k = 1; k <= k_max; ++k) {
        Complex ph = std::polar(1.0, 2 * M_PI * k * t / period);
        for (int c = 0; c < 3; ++c) v[c] += 2.0 * std::real(ph * modes[k][c * n3 + idx]);
    }
    return v;
}

double TimePeriodicField::mode_norm(int k) const {
    double s = 0;
    for (const Complex& v : modes[k]) s += std::norm(v);
    return std::sqrt(s);
}

double TimePeriodicField::total_norm() const {
    double s = 0;
    for (int k = 0; k <= k_max; ++k) {
        double m = mode_norm(k);
        s += (k == 0 ? 1.0 : 2.0) * m * m;
    }
    return std::sqrt(s);
}

namespace {

// applies the projected mode symbol in spectral space, with the 2/3 dealias
// mask; data is component-major spectral (continuum scaling irrelevant here)
void apply_mode_symbol(int k, const FlowParams& params, const GridSpec& g,
                       std::vector<Complex>& spec) {
    const std::size_t nn = g.nodes();
    const double omega = params.mode_frequency(k);
    const double kcut = (2.0 / 3.0) * (M_PI / g.h());
    parallel_for(static_cast<std::size_t>(g.n), [&](std::size_t ii) {
        int i = static_cast<int>(ii);
        const double k1 = g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            const double k2 = g.freq(j);
            for (int l = 0; l < g.n; ++l) {
                const double k3 = g.freq(l);
                const std::size_t idx = g.index(i, j, l);
                Complex f1 = spec[idx], f2 = spec[nn + idx], f3 = spec[2 * nn + idx];
                const double q2 = k1 * k1 + k2 * k2 + k3 * k3;
                Complex u1, u2, u3;
                if (q2 == 0.0) {
                    if (k == 0) {
                        u1 = u2 = u3 = 0.0;
                    } else {
                        Complex inv = 1.0 / Complex(0.0, omega);
                        u1 = f1 * inv;
                        u2 = f2 * inv;
                        u3 = f3 * inv;
                    }
                } else if (std::abs(k1) > kcut || std::abs(k2) > kcut || std::abs(k3) > kcut) {
                    u1 = u2 = u3 = 0.0;
                } else {
                    Complex kf = (k1 * f1 + k2 * f2 + k3 * f3) / q2;
                    Complex den(q2, omega - params.lambda * k1);
                    Complex inv = 1.0 / den;
                    u1 = (f1 - k1 * kf) * inv;
                    u2 = (f2 - k2 * kf) * inv;
                    u3 = (f3 - k3 * kf) * inv;
                }
                spec[idx] = u1;
                spec[nn + idx] = u2;
                spec[2 * nn + idx] = u3;
            }
        }
    });
}

std::vector<Complex> forcing_mode_grid(const ForcingSpec& f, int k, const GridSpec& g) {
    const std::size_t nn = g.nodes();
    std::vector<Complex> out(3 * nn);
    parallel_for(static_cast<std::size_t>(g.n), [&](std::size_t ii) {
        int i = static_cast<int>(ii);
        for (int j = 0; j < g.n; ++j)
            for (int l = 0; l < g.n; ++l) {
                std::size_t idx = g.index(i, j, l);
                CVec3 v = f.mode_value(k, g.node(i, j, l));
                out[idx] = v.x;
                out[nn + idx] = v.y;
                out[2 * nn + idx] = v.z;
            }
    });
    return out;
}

// spectral curl into a fresh array (input spectral, output spectral)
void spectral_curl(const GridSpec& g, const std::vector<Complex>& spec,
                   std::vector<Complex>& out) {
    const std::size_t nn = g.nodes();
    parallel_for(static_cast<std::size_t>(g.n), [&](std::size_t ii) {
        int i = static_cast<int>(ii);
        const double k1 = g.freq(i);
        for (int j = 0; j < g.n; ++j) {
            const double k2 = g.freq(j);
            for (int l = 0; l < g.n; ++l) {
                const double k3 = g.freq(l);
                const std::size_t idx = g.index(i, j, l);
                const Complex I(0, 1);
                Complex u1 = spec[idx], u2 = spec[nn + idx], u3 = spec[2 * nn + idx];
                out[idx] = I * (k2 * u3 - k3 * u2);
                out[nn + idx] = I * (k3 * u1 - k1 * u3);
                out[2 * nn + idx] = I * (k1 * u2 - k2 * u1);
            }
        }
    });
}

}  // namespace

std::vector<Complex> solve_mode(int k, const std::vector<Complex>& forcing_mode,
                                const FlowParams& params, const GridSpec& grid) {
    if (forcing_mode.size() != 3 * grid.nodes())
        throw std::invalid_argument("solve_mode: forcing grid size mismatch");
    Fft3 fft(grid.n);
    std::vector<Complex> work = forcing_mode;
    spectral_forward(grid, fft, work);
    apply_mode_symbol(k, params, grid, work);
    spectral_backward(grid, fft, work);
    return work;
}

TimePeriodicField solve_linear(const ForcingSpec& f, const FlowParams& params,
                               const GridSpec& grid, int k_max, LinearSolveReport* report,
                               bool estimate_wraparound) {
    f.validate();
    if (f.support_radius() + f.center.norm() > grid.half_length / 2.0)
        throw std::invalid_argument("solve_linear: forcing support must stay inside L/2");
    TimePeriodicField u;
    u.grid = grid;
    u.lambda = params.lambda;
    u.period = params.period;
    u.k_max = k_max;
    u.modes.resize(k_max + 1);
    Fft3 fft(grid.n);
    for (int k = 0; k <= k_max; ++k) {
        if (k >= static_cast<int>(f.coeffs.size()) || f.amplitude == 0.0) {
            u.modes[k].assign(3 * grid.nodes(), Complex(0, 0));
            continue;
        }
        std::vector<Complex> work = forcing_mode_grid(f, k, grid);
        spectral_forward(grid, fft, work);
        apply_mode_symbol(k, params, grid, work);
        spectral_backward(grid, fft, work);
        u.modes[k] = std::move(work);
    }
    if (report) report->wraparound_estimate = -1;
    if (estimate_wraparound && report) {
        // equal-spacing box doubling: (n/2, L) against (n, 2L) isolates the
        // wrap-around contamination from resolution effects
        GridSpec half{grid.n / 2, grid.half_length};
        GridSpec big{grid.n, 2 * grid.half_length};
        int kk = std::min(k_max, 1);
        TimePeriodicField ua = solve_linear(f, params, half, kk);
        TimePeriodicField ub = solve_linear(f, params, big, kk);
        double diff = 0, ref = 0;
        const std::size_t nna = half.nodes(), nnb = big.nodes();
        for (int i = 0; i < half.n; ++i)
            for (int j = 0; j < half.n; ++j)
                for (int l = 0; l < half.n; ++l) {
                    Vec3 x = half.node(i, j, l);
                    if (x.norm() > grid.half_length / 3.0) continue;
                    auto snap = [&](double c) {
                        int idx = static_cast<int>(std::llround(c / big.h()));
                        return idx < 0 ? idx + big.n : idx;
                    };
                    std::size_t ia = half.index(i, j, l);
                    std::size_t ib = big.index(snap(x.x), snap(x.y), snap(x.z));
                    for (int c = 0; c < 3; ++c) {
                        diff += std::norm(ua.modes[0][c * nna + ia] - ub.modes[0][c * nnb + ib]);
                        ref += std::norm(ua.modes[0][c * nna + ia]);
                    }
                }
        report->wraparound_estimate = ref > 0 ? std::sqrt(diff / ref) : 0.0;
    }
    return u;
}

namespace {

// shared pseudo-spectral machinery: physical u-modes + physical curl-modes ->
// physical modes of A(u) = -curl u ^ u via exact temporal collocation
std::vector<std::vector<Complex>> quadratic_modes(const GridSpec& g, double period, int k_max,
                                                  int M,
                                                  const std::vector<std::vector<Complex>>& u,
                                                  const std::vector<std::vector<Complex>>& w) {
    const std::size_t nn = g.nodes();
    std::vector<std::vector<Complex>> acc(k_max + 1);
    for (auto& a : acc) a.assign(3 * nn, Complex(0, 0));
    for (int m = 0; m < M; ++m) {
        std::vector<Complex> phases(k_max + 1);
        for (int k = 0; k <= k_max; ++k)
            phases[k] = std::polar(1.0, 2 * M_PI * k * m / static_cast<double>(M));
        parallel_for(nn, [&](std::size_t idx) {
            Vec3 uv, wv;
            for (int c = 0; c < 3; ++c) {
                double ur = u[0][c * nn + idx].real();
                double wr = w[0][c * nn + idx].real();
                for (int k = 1; k <= k_max; ++k) {
                    ur += 2.0 * std::real(phases[k] * u[k][c * nn + idx]);
                    wr += 2.0 * std::real(phases[k] * w[k][c * nn + idx]);
                }
                uv[c] = ur;
                wv[c] = wr;
            }
            Vec3 a = -wv.cross(uv);
            for (int k = 0; k <= k_max; ++k) {
                Complex e = std::conj(phases[k]) / static_cast<double>(M);
                for (int c = 0; c < 3; ++c) acc[k][c * nn + idx] += e * a[c];
            }
        });
    }
    return acc;
}

}  // namespace

TimePeriodicField picard_solve(const ForcingSpec& f, const FlowParams& params,
                               const GridSpec& grid, int k_max, const PicardOptions& opts,
                               PicardHistory* history) {
    f.validate();
    if (f.amplitude > opts.amplitude_guard)
        throw std::invalid_argument("picard_solve: forcing amplitude exceeds the guard");
    const int M = opts.collocation_times > 0 ? opts.collocation_times : 4 * k_max + 1;
    if (M < 3 * k_max + 1)
        throw std::invalid_argument("picard_solve: collocation count under-resolves the quadratic term");

    Fft3 fft(grid.n);
    const std::size_t nn = grid.nodes();

    // spectral forcing modes, reused every iteration; modes beyond the
    // forcing band stay empty (zero)
    std::vector<std::vector<Complex>> fhat(k_max + 1);
    for (int k = 0; k <= k_max; ++k) {
        if (k >= static_cast<int>(f.coeffs.size()) || f.amplitude == 0.0) continue;
        fhat[k] = forcing_mode_grid(f, k, grid);
        spectral_forward(grid, fft, fhat[k]);
    }

    TimePeriodicField u;
    u.grid = grid;
    u.lambda = params.lambda;
    u.period = params.period;
    u.k_max = k_max;
    u.modes.resize(k_max + 1);
    std::vector<std::vector<Complex>> curl(k_max + 1);

    // initial guess: linear solve; keep physical u and curl u per mode
    std::vector<Complex> scratch(3 * nn);
    for (int k = 0; k <= k_max; ++k) {
        std::vector<Complex> spec =
            fhat[k].empty() ? std::vector<Complex>(3 * nn, Complex(0, 0)) : fhat[k];
        apply_mode_symbol(k, params, grid, spec);
        curl[k].assign(3 * nn, Complex(0, 0));
        spectral_curl(grid, spec, curl[k]);
        spectral_backward(grid, fft, spec);
        spectral_backward(grid, fft, curl[k]);
        u.modes[k] = std::move(spec);
    }

    PicardHistory hist;
    double base_norm = u.total_norm();
    if (base_norm == 0) base_norm = 1;
    int grow_streak = 0;
    double prev_norm = u.total_norm();

    for (int it = 0; it < opts.max_iter; ++it) {
        auto a_modes = quadratic_modes(grid, params.period, k_max, M, u.modes, curl);
        double delta2 = 0;
        for (int k = 0; k <= k_max; ++k) {
            std::vector<Complex>& spec = a_modes[k];
            spectral_forward(grid, fft, spec);
            if (!fhat[k].empty())
                for (std::size_t i = 0; i < 3 * nn; ++i) spec[i] += fhat[k][i];
            apply_mode_symbol(k, params, grid, spec);
            spectral_curl(grid, spec, scratch);
            spectral_backward(grid, fft, scratch);
            curl[k].swap(scratch);
            spectral_backward(grid, fft, spec);
            double d2 = 0;
            for (std::size_t i = 0; i < 3 * nn; ++i) d2 += std::norm(spec[i] - u.modes[k][i]);
            delta2 += (k == 0 ? 1.0 : 2.0) * d2;
            u.modes[k].swap(spec);
        }
        double rel = std::sqrt(delta2) / base_norm;
        hist.rel_change.push_back(rel);
        hist.iterations = it + 1;
        double norm_now = u.total_norm();
        grow_streak = (norm_now > prev_norm * (1 + 1e-12)) ? grow_streak + 1 : 0;
        prev_norm = norm_now;
        if (grow_streak >= 3 && rel > 1.0) {
            hist.diverged = true;
            break;
        }
        if (rel < opts.tol) {
            hist.converged = true;
            break;
        }
    }
    if (history) *history = hist;
    if (hist.diverged)
        throw std::runtime_error("picard_solve: iteration diverged (norm grew three times in a row)");
    return u;
}

ProjectedParts project_parts(const TimePeriodicField& u) {
    ProjectedParts out;
    out.steady = u.modes[0];
    out.purely_periodic = u;
    std::fill(out.purely_periodic.modes[0].begin(), out.purely_periodic.modes[0].end(),
              Complex(0, 0));
    return out;
}

double max_spectral_divergence(const TimePeriodicField& u) {
    Fft3 fft(u.grid.n);
    const GridSpec& g = u.grid;
    const std::size_t nn = g.nodes();
    double worst = 0;
    for (int k = 0; k <= u.k_max; ++k) {
        std::vector<Complex> spec = u.modes[k];
        spectral_forward(g, fft, spec);
        double scale = 0;
        for (std::size_t i = 0; i < 3 * nn; ++i)
            scale = std::max(scale, std::abs(spec[i]));
        if (scale == 0) continue;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int l = 0; l < g.n; ++l) {
                    std::size_t idx = g.index(i, j, l);
                    Complex div = Complex(0, 1) * (g.freq(i) * spec[idx] + g.freq(j) * spec[nn + idx] +
                                                   g.freq(l) * spec[2 * nn + idx]);
                    double q = std::sqrt(g.freq(i) * g.freq(i) + g.freq(j) * g.freq(j) +
                                         g.freq(l) * g.freq(l));
                    if (q > 0) worst = std::max(worst, std::abs(div) / (q * scale));
                }
    }
    return worst;
}

double energy_identity_residual(const TimePeriodicField& u, const ForcingSpec& f) {
    // steady mode: int grad v : grad v = int Pf . v on the box (Parseval;
    // the drift term contributes zero). Both sides in spectral form.
    const GridSpec& g = u.grid;
    Fft3 fft(g.n);
    const std::size_t nn = g.nodes();
    std::vector<Complex> spec = u.modes[0];
    spectral_forward(g, fft, spec);
    std::vector<Complex> fspec = forcing_mode_grid(f, 0, g);
    spectral_forward(g, fft, fspec);
    double lhs = 0, rhs = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int l = 0; l < g.n; ++l) {
                std::size_t idx = g.index(i, j, l);
                double q2 = g.freq(i) * g.freq(i) + g.freq(j) * g.freq(j) + g.freq(l) * g.freq(l);
                for (int c = 0; c < 3; ++c) {
                    lhs += q2 * std::norm(spec[c * nn + idx]);
                    rhs += std::real(fspec[c * nn + idx] * std::conj(spec[c * nn + idx]));
                }
            }
    const double vol = std::pow(2 * g.half_length, 3);
    lhs /= vol;
    rhs /= vol;
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
}

std::vector<std::vector<Complex>> curl_field_modes(const TimePeriodicField& u) {
    Fft3 fft(u.grid.n);
    std::vector<std::vector<Complex>> out(u.k_max + 1);
    std::vector<Complex> spec;
    for (int k = 0; k <= u.k_max; ++k) {
        spec = u.modes[k];
        spectral_forward(u.grid, fft, spec);
        out[k].assign(3 * u.grid.nodes(), Complex(0, 0));
        spectral_curl(u.grid, spec, out[k]);
        spectral_backward(u.grid, fft, out[k]);
    }
    return out;
}

NonlinearModes nonlinear_source_modes(const TimePeriodicField& u) {
    NonlinearModes out;
    out.curl_modes = curl_field_modes(u);
    const int M = 4 * u.k_max + 1;
    out.a_modes = quadratic_modes(u.grid, u.period, u.k_max, M, u.modes, out.curl_modes);
    return out;
}

}  // namespace tposeen
