#include "tposeen/farfield.hpp"

#include <cmath>
#include <stdexcept>

#include "tposeen/parallel.hpp"
#include "tposeen/periodic_kernels.hpp"
#include "tposeen/quadrature.hpp"
#include "tposeen/steady_kernels.hpp"
#include "tposeen/wake.hpp"

namespace tposeen {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

// ascending coordinate -> FFT layout index, periodic
inline int wrap_fft(int a, int n) {
    a %= n;
    if (a < 0) a += n;
    int shifted = a - n / 2;
    return shifted < 0 ? shifted + n : shifted;
}

// triquadratic interpolation of one complex component on the periodic grid
// (O(h^3); the near-ball quadrature leans on this accuracy)
Complex trilerp(const std::vector<Complex>& data, int comp, const GridSpec& g, const Vec3& y) {
    const double h = g.h();
    const std::size_t nn = g.nodes();
    double f[3] = {y.x / h, y.y / h, y.z / h};
    int base[3];
    double w[3][3];
    for (int a = 0; a < 3; ++a) {
        base[a] = static_cast<int>(std::llround(f[a]));
        double t = f[a] - base[a];
        w[a][0] = 0.5 * t * (t - 1.0);
        w[a][1] = 1.0 - t * t;
        w[a][2] = 0.5 * t * (t + 1.0);
        base[a] += g.n / 2;  // ascending-coordinate index
    }
    Complex acc = 0;
    for (int dx = -1; dx <= 1; ++dx) {
        double wx = w[0][dx + 1];
        if (wx == 0) continue;
        for (int dy = -1; dy <= 1; ++dy) {
            double wxy = wx * w[1][dy + 1];
            if (wxy == 0) continue;
            for (int dz = -1; dz <= 1; ++dz) {
                double www = wxy * w[2][dz + 1];
                if (www == 0) continue;
                std::size_t idx = g.index(wrap_fft(base[0] + dx, g.n), wrap_fft(base[1] + dy, g.n),
                                          wrap_fft(base[2] + dz, g.n));
                acc += www * data[comp * nn + idx];
            }
        }
    }
    return acc;
}

using Acc9 = std::array<Complex, 9>;

inline void add(Acc9& a, const Acc9& b, double w) {
    for (int i = 0; i < 9; ++i) a[i] += w * b[i];
}
inline double norm9(const Acc9& a, int m) {
    double s = 0;
    for (int i = 0; i < m; ++i) s += std::norm(a[i]);
    return std::sqrt(s);
}

struct GridConvOut {
    Acc9 value{};
    double quad_error = 0;
};

// Kernel-against-grid convolution: far sum over grid nodes with a quintic
// partition around the singular point z = 0, plus a spherical near-field
// integral of the partition complement against the interpolated source.
// FNode fills Acc9 given (z, node index); FPoint the same at off-grid y.
template <typename FNode, typename FPoint>
GridConvOut grid_convolve(const Vec3& x, const GridSpec& g, int m_used, FNode&& f_node,
                          FPoint&& f_point, bool estimate_error = true) {
    const double h = g.h();
    const double rn = std::min(1.0, x.norm() / 4.0);

    auto far_pass = [&](int stride) {
        std::vector<Acc9> plane(g.n / stride + 1, Acc9{});
        parallel_for(static_cast<std::size_t>((g.n + stride - 1) / stride), [&](std::size_t pi) {
            int i = static_cast<int>(pi) * stride;
            Acc9 acc{};
            Acc9 tmp{};
            const double w3 = h * h * h * stride * stride * stride;
            for (int j = 0; j < g.n; j += stride)
                for (int l = 0; l < g.n; l += stride) {
                    Vec3 y = g.node(i, j, l);
                    Vec3 z = x - y;
                    if (z.norm() < 1e-12) continue;
                    double w = rn > 0 ? smoothstep_quintic(z.norm(), 0.5 * rn, rn) : 1.0;
                    if (w == 0) continue;
                    tmp = Acc9{};
                    f_node(z, g.index(i, j, l), tmp);
                    add(acc, tmp, w * w3);
                }
            plane[pi] = acc;
        });
        Acc9 total{};
        for (const auto& p : plane) add(total, p, 1.0);
        return total;
    };

    GridConvOut out;
    out.value = far_pass(1);

    // near ball (only when it can intersect the grid box)
    bool near_needed = rn > 0;
    if (near_needed) {
        double dist_box = 0;
        for (int c = 0; c < 3; ++c)
            dist_box = std::max(dist_box, std::abs(x[c]) - g.half_length);
        if (dist_box > rn) near_needed = false;
    }
    if (near_needed) {
        std::vector<double> un, uw, cn, cw;
        detail::gauss_legendre(12, un, uw);
        detail::gauss_legendre(10, cn, cw);
        Acc9 tmp{};
        for (std::size_t ir = 0; ir < un.size(); ++ir) {
            double u = 0.5 * (un[ir] + 1.0);
            double rho = rn * u * u;
            double drho = rn * u * uw[ir];
            if (rho == 0) continue;
            double wcut = 1.0 - smoothstep_quintic(rho, 0.5 * rn, rn);
            if (wcut == 0) continue;
            for (std::size_t ic = 0; ic < cn.size(); ++ic) {
                double ct = cn[ic], st = std::sqrt(std::max(0.0, 1 - ct * ct));
                for (int ip = 0; ip < 16; ++ip) {
                    double ph = 2.0 * M_PI * (ip + 0.5) / 16;
                    Vec3 z{rho * ct, rho * st * std::cos(ph), rho * st * std::sin(ph)};
                    double w = rho * rho * drho * cw[ic] * (2.0 * M_PI / 16) * wcut;
                    tmp = Acc9{};
                    f_point(z, x - z, tmp);
                    add(out.value, tmp, w);
                }
            }
        }
    }

    if (estimate_error) {
        Acc9 coarse = far_pass(2);
        Acc9 diff{};
        for (int i = 0; i < 9; ++i) diff[i] = out.value[i] - coarse[i];
        // the near-ball part is shared; the stride-2 companion measures the
        // grid-sum resolution error
        out.quad_error = norm9(diff, m_used);
        if (near_needed) {
            // crude near-ball error proxy: redo at reduced order
            // (omitted: the smooth partition makes this subdominant)
        }
    }
    return out;
}

// tail model: shell magnitude continued as (r/L)^{-a}, integrated outside the
// box against a kernel probe taken on the box faces
double tail_estimate(const Vec3& x, double kernel_probe, double shell, double a, double L) {
    if (shell <= 0) return 0;
    double geom = (a > 3.2) ? 4.0 * M_PI * L * L * L / (a - 3.0)
                            : 2.0 * M_PI * L * L / std::max(a - 2.0, 0.25);
    (void)x;
    return shell * kernel_probe * geom;
}

}  // namespace

FarfieldSources prepare_farfield_sources(const TimePeriodicField& u, const ForcingSpec& f) {
    FarfieldSources s;
    s.grid = u.grid;
    s.lambda = u.lambda;
    s.period = u.period;
    s.k_max = u.k_max;
    s.forcing = f;
    NonlinearModes nm = nonlinear_source_modes(u);
    s.a_modes = std::move(nm.a_modes);

    const GridSpec& g = s.grid;
    const std::size_t nn = g.nodes();
    Fft3 fft(g.n);
    FlowParams params = s.params();

    // q_k = F^-1[ i xi . g_hat / (|xi|^2 - i lambda xi_1 + i omega_k) ]
    s.q_modes.resize(s.k_max);
    for (int k = 1; k <= s.k_max; ++k) {
        std::vector<Complex> gk(3 * nn);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int l = 0; l < g.n; ++l) {
                    std::size_t idx = g.index(i, j, l);
                    CVec3 fv = f.mode_value(k, g.node(i, j, l));
                    gk[idx] = s.a_modes[k][idx] + fv.x;
                    gk[nn + idx] = s.a_modes[k][nn + idx] + fv.y;
                    gk[2 * nn + idx] = s.a_modes[k][2 * nn + idx] + fv.z;
                }
        spectral_forward(g, fft, gk);
        std::vector<Complex> q(nn);
        const double omega = params.mode_frequency(k);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int l = 0; l < g.n; ++l) {
                    std::size_t idx = g.index(i, j, l);
                    double k1 = g.freq(i), k2 = g.freq(j), k3 = g.freq(l);
                    Complex divg = Complex(0, 1) * (k1 * gk[idx] + k2 * gk[nn + idx] +
                                                    k3 * gk[2 * nn + idx]);
                    Complex den(k1 * k1 + k2 * k2 + k3 * k3, omega - s.lambda * k1);
                    q[idx] = divg / den;
                }
        fft.backward(q.data());
        double scale = 1.0 / (g.h() * g.h() * g.h() * static_cast<double>(nn));
        for (auto& v : q) v *= scale;
        s.q_modes[k - 1] = std::move(q);
    }

    // boundary-shell magnitudes for the tail models
    const double edge = g.half_length - 2.5 * g.h();
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int l = 0; l < g.n; ++l) {
                Vec3 y = g.node(i, j, l);
                if (std::max({std::abs(y.x), std::abs(y.y), std::abs(y.z)}) < edge) continue;
                std::size_t idx = g.index(i, j, l);
                double m0 = 0, mk = 0;
                for (int c = 0; c < 3; ++c) m0 += std::norm(s.a_modes[0][c * nn + idx]);
                s.shell_g0 = std::max(s.shell_g0, std::sqrt(m0));
                for (int k = 1; k <= s.k_max; ++k) {
                    mk = 0;
                    for (int c = 0; c < 3; ++c) mk += std::norm(s.a_modes[k][c * nn + idx]);
                    s.shell_gk = std::max(s.shell_gk, std::sqrt(mk));
                    s.shell_qk = std::max(s.shell_qk, std::abs(s.q_modes[k - 1][idx]));
                }
            }
    return s;
}

namespace {

// source accessors: g_k = A_k (grid) + f_k (analytic)
CVec3 source_at_node(const FarfieldSources& s, int k, std::size_t idx, const Vec3& y) {
    const std::size_t nn = s.grid.nodes();
    CVec3 v{s.a_modes[k][idx], s.a_modes[k][nn + idx], s.a_modes[k][2 * nn + idx]};
    return v + s.forcing.mode_value(k, y);
}
CVec3 source_interp(const FarfieldSources& s, int k, const Vec3& y) {
    CVec3 v{trilerp(s.a_modes[k], 0, s.grid, y), trilerp(s.a_modes[k], 1, s.grid, y),
            trilerp(s.a_modes[k], 2, s.grid, y)};
    return v + s.forcing.mode_value(k, y);
}

double kernel_probe_gamma0(const Vec3& x, const FlowParams& p, double L) {
    double worst = 0;
    for (int f = 0; f < 6; ++f) {
        Vec3 y{0, 0, 0};
        y[f / 2] = (f % 2 ? L : -L);
        Vec3 z = x - y;
        if (z.norm() < 1e-6) continue;
        worst = std::max(worst, gamma0(z, p).frobenius());
    }
    return worst;
}

}  // namespace

FarValue eval_velocity_farfield_steady(const Vec3& x, const FarfieldSources& s) {
    FlowParams p = s.params();
    auto node = [&](const Vec3& z, std::size_t idx, Acc9& out) {
        Mat3 K = gamma0(z, p);
        CVec3 g = source_at_node(s, 0, idx, x - z);
        for (int j = 0; j < 3; ++j)
            out[j] = K(j, 0) * g.x + K(j, 1) * g.y + K(j, 2) * g.z;
    };
    auto pt = [&](const Vec3& z, const Vec3& y, Acc9& out) {
        Mat3 K = gamma0(z, p);
        CVec3 g = source_interp(s, 0, y);
        for (int j = 0; j < 3; ++j)
            out[j] = K(j, 0) * g.x + K(j, 1) * g.y + K(j, 2) * g.z;
    };
    GridConvOut r = grid_convolve(x, s.grid, 3, node, pt);
    FarValue out;
    out.value = {r.value[0].real(), r.value[1].real(), r.value[2].real()};
    out.quad_error = r.quad_error;
    out.tail_error = tail_estimate(x, kernel_probe_gamma0(x, p, s.grid.half_length), s.shell_g0,
                                   2.5, s.grid.half_length);
    return out;
}

FarMat eval_grad_velocity_farfield_steady(const Vec3& x, const FarfieldSources& s) {
    FlowParams p = s.params();
    auto fill = [&](const Vec3& z, const CVec3& g, Acc9& out) {
        Tensor3x3x3 K = grad_gamma0(z, p);
        for (int m = 0; m < 3; ++m)
            for (int j = 0; j < 3; ++j)
                out[3 * m + j] = K(m, j, 0) * g.x + K(m, j, 1) * g.y + K(m, j, 2) * g.z;
    };
    auto node = [&](const Vec3& z, std::size_t idx, Acc9& out) {
        fill(z, source_at_node(s, 0, idx, x - z), out);
    };
    auto pt = [&](const Vec3& z, const Vec3& y, Acc9& out) { fill(z, source_interp(s, 0, y), out); };
    GridConvOut r = grid_convolve(x, s.grid, 9, node, pt);
    FarMat out;
    for (int m = 0; m < 3; ++m)
        for (int j = 0; j < 3; ++j) out.value(m, j) = r.value[3 * m + j].real();
    out.quad_error = r.quad_error;
    out.tail_error = tail_estimate(x, kernel_probe_gamma0(x, p, s.grid.half_length), s.shell_g0,
                                   2.5, s.grid.half_length);
    return out;
}

FarValue eval_curl_steady_farfield(const Vec3& x, const FarfieldSources& s) {
    FlowParams p = s.params();
    auto node = [&](const Vec3& z, std::size_t idx, Acc9& out) {
        CVec3 kv(grad_phi0(z, p));
        CVec3 c = kv.cross(source_at_node(s, 0, idx, x - z));
        out[0] = c.x;
        out[1] = c.y;
        out[2] = c.z;
    };
    auto pt = [&](const Vec3& z, const Vec3& y, Acc9& out) {
        CVec3 kv(grad_phi0(z, p));
        CVec3 c = kv.cross(source_interp(s, 0, y));
        out[0] = c.x;
        out[1] = c.y;
        out[2] = c.z;
    };
    GridConvOut r = grid_convolve(x, s.grid, 3, node, pt);
    FarValue out;
    out.value = {r.value[0].real(), r.value[1].real(), r.value[2].real()};
    out.quad_error = r.quad_error;
    double probe = 0;
    for (int f = 0; f < 6; ++f) {
        Vec3 y{0, 0, 0};
        y[f / 2] = (f % 2 ? s.grid.half_length : -s.grid.half_length);
        if ((x - y).norm() > 1e-6) probe = std::max(probe, grad_phi0(x - y, p).norm());
    }
    out.tail_error = tail_estimate(x, probe, s.shell_g0, 2.5, s.grid.half_length);
    return out;
}

Vec3 FarModeValues::synthesize(double period, double t) const {
    Vec3 v;
    for (std::size_t k = 1; k <= modes.size(); ++k) {
        Complex ph = std::polar(1.0, 2 * M_PI * k * t / period);
        for (int c = 0; c < 3; ++c) v[c] += 2.0 * std::real(ph * modes[k - 1][c]);
    }
    return v;
}

double FarModeValues::sup_over_times(double period, int nt) const {
    double best = 0;
    for (int i = 0; i < nt; ++i) best = std::max(best, synthesize(period, period * i / nt).norm());
    return best;
}

double FarModeMats::sup_over_times(double period, int nt) const {
    double best = 0;
    for (int i = 0; i < nt; ++i) {
        double t = period * i / nt;
        double s = 0;
        for (std::size_t k = 1; k <= modes.size(); ++k) {
            Complex ph = std::polar(1.0, 2 * M_PI * k * t / period);
            for (int e = 0; e < 9; ++e) {
                double re = 2.0 * std::real(ph * modes[k - 1][e]);
                s += re * re;
            }
        }
        best = std::max(best, std::sqrt(s));
    }
    return best;
}

FarModeValues eval_curl_periodic_farfield(const Vec3& x, const FarfieldSources& s) {
    FlowParams p = s.params();
    FarModeValues out;
    out.modes.resize(s.k_max);
    for (int k = 1; k <= s.k_max; ++k) {
        double eta = p.mode_frequency(k);
        auto node = [&](const Vec3& z, std::size_t idx, Acc9& o) {
            CVec3 c = grad_gamma_H(z, eta, p).cross(source_at_node(s, k, idx, x - z));
            o[0] = c.x;
            o[1] = c.y;
            o[2] = c.z;
        };
        auto pt = [&](const Vec3& z, const Vec3& y, Acc9& o) {
            CVec3 c = grad_gamma_H(z, eta, p).cross(source_interp(s, k, y));
            o[0] = c.x;
            o[1] = c.y;
            o[2] = c.z;
        };
        GridConvOut r = grid_convolve(x, s.grid, 3, node, pt, k == 1);
        out.modes[k - 1] = {r.value[0], r.value[1], r.value[2]};
        if (k == 1) out.quad_error = r.quad_error;  // dominant mode carries the estimate
        double probe = 0;
        for (int f = 0; f < 6; ++f) {
            Vec3 y{0, 0, 0};
            y[f / 2] = (f % 2 ? s.grid.half_length : -s.grid.half_length);
            if ((x - y).norm() > 1e-6) probe = std::max(probe, grad_gamma_H(x - y, eta, p).norm());
        }
        out.tail_error += 2.0 * tail_estimate(x, probe, s.shell_gk, 4.5, s.grid.half_length);
    }
    return out;
}

FarModeValues eval_velocity_periodic_farfield(const Vec3& x, const FarfieldSources& s) {
    FlowParams p = s.params();
    const std::size_t nn = s.grid.nodes();
    FarModeValues out;
    out.modes.resize(s.k_max);
    for (int k = 1; k <= s.k_max; ++k) {
        double eta = p.mode_frequency(k);
        const std::vector<Complex>& q = s.q_modes[k - 1];
        auto node = [&](const Vec3& z, std::size_t idx, Acc9& o) {
            Complex gh = gamma_H(z, eta, p);
            CVec3 g = source_at_node(s, k, idx, x - z);
            double r3 = z.norm();
            r3 = r3 * r3 * r3;
            Complex qv = q[idx];
            for (int c = 0; c < 3; ++c) o[c] = gh * g[c] - z[c] / (kFourPi * r3) * qv;
        };
        auto pt = [&](const Vec3& z, const Vec3& y, Acc9& o) {
            Complex gh = gamma_H(z, eta, p);
            CVec3 g = source_interp(s, k, y);
            double r3 = z.norm();
            r3 = r3 * r3 * r3;
            Complex qv = trilerp(q, 0, s.grid, y);
            for (int c = 0; c < 3; ++c) o[c] = gh * g[c] - z[c] / (kFourPi * r3) * qv;
        };
        GridConvOut r = grid_convolve(x, s.grid, 3, node, pt, k == 1);
        out.modes[k - 1] = {r.value[0], r.value[1], r.value[2]};
        if (k == 1) out.quad_error = r.quad_error;
        double probe = 1.0 / (kFourPi * std::max(1.0, x.norm() - s.grid.half_length));
        out.tail_error +=
            2.0 * tail_estimate(x, probe / std::max(1.0, x.norm() - s.grid.half_length),
                                s.shell_qk, 5.0, s.grid.half_length);
    }
    return out;
}

FarModeMats eval_grad_velocity_periodic_farfield(const Vec3& x, const FarfieldSources& s) {
    FlowParams p = s.params();
    FarModeMats out;
    out.modes.resize(s.k_max);
    for (int k = 1; k <= s.k_max; ++k) {
        double eta = p.mode_frequency(k);
        const std::vector<Complex>& q = s.q_modes[k - 1];
        Complex q_at_x = 0;
        {
            double inb = std::max({std::abs(x.x), std::abs(x.y), std::abs(x.z)});
            if (inb < s.grid.half_length) q_at_x = trilerp(q, 0, s.grid, x);
        }
        auto fill = [&](const Vec3& z, const CVec3& g, Complex qv, bool pv, Acc9& o) {
            CVec3 dgh = grad_gamma_H(z, eta, p);
            double r = z.norm();
            double r3 = r * r * r;
            Complex qeff = pv ? (qv - q_at_x) : qv;  // PV regularization near z = 0
            for (int m = 0; m < 3; ++m)
                for (int j = 0; j < 3; ++j) {
                    double d2n = (3.0 * z[m] * z[j] / (r * r) - (m == j ? 1.0 : 0.0)) /
                                 (kFourPi * r3);
                    o[3 * m + j] = dgh[m] * g[j] + d2n * qeff;
                }
        };
        auto node = [&](const Vec3& z, std::size_t idx, Acc9& o) {
            fill(z, source_at_node(s, k, idx, x - z), q[idx], false, o);
        };
        auto pt = [&](const Vec3& z, const Vec3& y, Acc9& o) {
            fill(z, source_interp(s, k, y), trilerp(q, 0, s.grid, y), true, o);
        };
        GridConvOut r = grid_convolve(x, s.grid, 9, node, pt, k == 1);
        out.modes[k - 1] = r.value;
        // the -delta_mj q(x)/3 term of the Newton Hessian
        for (int m = 0; m < 3; ++m) out.modes[k - 1][3 * m + m] -= q_at_x / 3.0;
        if (k == 1) out.quad_error = r.quad_error;
        double dist = std::max(1.0, x.norm() - s.grid.half_length);
        out.tail_error += 2.0 * tail_estimate(x, 1.0 / (kFourPi * dist * dist * dist),
                                              s.shell_qk, 5.0, s.grid.half_length);
    }
    return out;
}

VorticityEval eval_vorticity_farfield(const Vec3& x, double t, const FarfieldSources& s) {
    VorticityEval out;
    FarValue st = eval_curl_steady_farfield(x, s);
    FarModeValues pp = eval_curl_periodic_farfield(x, s);
    out.curl_steady = st.value;
    out.curl_periodic = pp.synthesize(s.period, t);
    out.quad_error = st.quad_error + pp.quad_error;
    out.tail_error = st.tail_error + pp.tail_error;
    return out;
}

double CutoffSpec::chi(double r) const {
    return 1.0 - smoothstep_quintic(r, 1.25 * S, 1.75 * S);
}

SplitParts compute_Hs_Fs(const Vec3& x, double t, const FarfieldSources& s,
                         const CutoffSpec& cutoff) {
    if (cutoff.S < 2 * cutoff.S0)
        throw std::invalid_argument("compute_Hs_Fs: S must be at least 2 S0");
    if (x.norm() <= cutoff.S)
        throw std::invalid_argument("compute_Hs_Fs: F_S is defined on |x| > S only");
    FlowParams p = s.params();
    SplitParts out;

    // weighting helpers: H source = f + chi A; F source = (1 - chi) A
    auto weighted_node = [&](int k, std::size_t idx, const Vec3& y, bool Hpart) {
        const std::size_t nn = s.grid.nodes();
        CVec3 a{s.a_modes[k][idx], s.a_modes[k][nn + idx], s.a_modes[k][2 * nn + idx]};
        double c = cutoff.chi(y.norm());
        if (Hpart) return s.forcing.mode_value(k, y) + a * c;
        return a * (1.0 - c);
    };
    auto weighted_interp = [&](int k, const Vec3& y, bool Hpart) {
        CVec3 a{trilerp(s.a_modes[k], 0, s.grid, y), trilerp(s.a_modes[k], 1, s.grid, y),
                trilerp(s.a_modes[k], 2, s.grid, y)};
        double c = cutoff.chi(y.norm());
        if (Hpart) return s.forcing.mode_value(k, y) + a * c;
        return a * (1.0 - c);
    };

    for (bool Hpart : {true, false}) {
        // steady velocity
        auto vnode = [&](const Vec3& z, std::size_t idx, Acc9& o) {
            Mat3 K = gamma0(z, p);
            CVec3 g = weighted_node(0, idx, x - z, Hpart);
            for (int j = 0; j < 3; ++j)
                o[j] = K(j, 0) * g.x + K(j, 1) * g.y + K(j, 2) * g.z;
        };
        auto vpt = [&](const Vec3& z, const Vec3& y, Acc9& o) {
            Mat3 K = gamma0(z, p);
            CVec3 g = weighted_interp(0, y, Hpart);
            for (int j = 0; j < 3; ++j)
                o[j] = K(j, 0) * g.x + K(j, 1) * g.y + K(j, 2) * g.z;
        };
        GridConvOut rv = grid_convolve(x, s.grid, 3, vnode, vpt, Hpart);
        Vec3 vel{rv.value[0].real(), rv.value[1].real(), rv.value[2].real()};

        auto cnode = [&](const Vec3& z, std::size_t idx, Acc9& o) {
            CVec3 c = CVec3(grad_phi0(z, p)).cross(weighted_node(0, idx, x - z, Hpart));
            o[0] = c.x;
            o[1] = c.y;
            o[2] = c.z;
        };
        auto cpt = [&](const Vec3& z, const Vec3& y, Acc9& o) {
            CVec3 c = CVec3(grad_phi0(z, p)).cross(weighted_interp(0, y, Hpart));
            o[0] = c.x;
            o[1] = c.y;
            o[2] = c.z;
        };
        GridConvOut rc = grid_convolve(x, s.grid, 3, cnode, cpt, false);
        Vec3 curl_st{rc.value[0].real(), rc.value[1].real(), rc.value[2].real()};

        Vec3 curl_pp;
        for (int k = 1; k <= s.k_max; ++k) {
            double eta = p.mode_frequency(k);
            auto pnode = [&](const Vec3& z, std::size_t idx, Acc9& o) {
                CVec3 c = grad_gamma_H(z, eta, p).cross(weighted_node(k, idx, x - z, Hpart));
                o[0] = c.x;
                o[1] = c.y;
                o[2] = c.z;
            };
            auto ppt = [&](const Vec3& z, const Vec3& y, Acc9& o) {
                CVec3 c = grad_gamma_H(z, eta, p).cross(weighted_interp(k, y, Hpart));
                o[0] = c.x;
                o[1] = c.y;
                o[2] = c.z;
            };
            GridConvOut rp = grid_convolve(x, s.grid, 3, pnode, ppt, false);
            Complex ph = std::polar(1.0, p.mode_frequency(k) * t);
            curl_pp[0] += 2.0 * std::real(ph * rp.value[0]);
            curl_pp[1] += 2.0 * std::real(ph * rp.value[1]);
            curl_pp[2] += 2.0 * std::real(ph * rp.value[2]);
        }
        if (Hpart) {
            out.vel_steady_H = vel;
            out.curl_steady_H = curl_st;
            out.curl_periodic_H = curl_pp;
            out.quad_error += rv.quad_error;
        } else {
            out.vel_steady_F = vel;
            out.curl_steady_F = curl_st;
            out.curl_periodic_F = curl_pp;
        }
    }
    return out;
}

Vec3 field_value_at_node(const TimePeriodicField& u, const Vec3& node, double t) {
    const GridSpec& g = u.grid;
    const double h = g.h();
    auto snap = [&](double c) {
        int a = static_cast<int>(std::llround(c / h));
        if (std::abs(a * h - c) > 1e-9)
            throw std::invalid_argument("field_value_at_node: x is not a grid node");
        a %= g.n;
        if (a < 0) a += g.n;
        return a;
    };
    std::size_t idx = g.index(snap(node.x), snap(node.y), snap(node.z));
    return u.value_at(t, idx);
}

Vec3 curl_value_at_node(const std::vector<std::vector<Complex>>& curl_modes, const GridSpec& g,
                        double period, const Vec3& node, double t) {
    const double h = g.h();
    auto snap = [&](double c) {
        int a = static_cast<int>(std::llround(c / h));
        if (std::abs(a * h - c) > 1e-9)
            throw std::invalid_argument("curl_value_at_node: x is not a grid node");
        a %= g.n;
        if (a < 0) a += g.n;
        return a;
    };
    std::size_t idx = g.index(snap(node.x), snap(node.y), snap(node.z));
    const std::size_t nn = g.nodes();
    Vec3 v{curl_modes[0][idx].real(), curl_modes[0][nn + idx].real(),
           curl_modes[0][2 * nn + idx].real()};
    for (std::size_t k = 1; k < curl_modes.size(); ++k) {
        Complex ph = std::polar(1.0, 2 * M_PI * k * t / period);
        for (int c = 0; c < 3; ++c) v[c] += 2.0 * std::real(ph * curl_modes[k][c * nn + idx]);
    }
    return v;
}

}  // namespace tposeen
