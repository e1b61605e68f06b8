// tposeen: time-periodic Oseen kernels, whole-space flow solves, and
// wake-decay verification. See README.md for the config schema.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tposeen/field_io.hpp"
#include "tposeen/harness.hpp"
#include "tposeen/periodic_kernels.hpp"
#include "tposeen/quadrature.hpp"
#include "tposeen/steady_kernels.hpp"
#include "tposeen/wake.hpp"

using json = nlohmann::ordered_json;
using namespace tposeen;

namespace {

struct Config {
    FlowParams flow{1.0, 2 * M_PI};
    ForcingSpec forcing;
    GridSpec grid{96, 24.0};
    int k_max = 4;
    PicardOptions solver;
    std::vector<RaySpec> rays;
    double mask_radius = 0;
    std::vector<Vec3> kernel_points;
    bool dump_field_flag = false;
    double cutoff_S = 2.0;
    json fit_windows;
};

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    throw std::runtime_error("config error at '" + path + "': " + what);
}

template <typename T>
T require(const json& j, const std::string& path) {
    const json* cur = &j;
    std::string walked;
    std::size_t pos = 0;
    while (pos != std::string::npos) {
        std::size_t dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        walked += (walked.empty() ? "" : ".") + key;
        if (!cur->contains(key)) config_error(walked, "missing field");
        cur = &(*cur)[key];
        pos = dot == std::string::npos ? dot : dot + 1;
    }
    try {
        return cur->get<T>();
    } catch (const std::exception& e) {
        config_error(path, std::string("wrong type: ") + e.what());
    }
}

Vec3 to_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) config_error(path, "expected an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Config parse_config(const json& j) {
    Config c;
    c.flow = FlowParams(require<double>(j, "flow.lambda"), require<double>(j, "flow.period"));
    const json& f = j.contains("forcing") ? j["forcing"] : json::object();
    c.forcing.center = f.contains("center") ? to_vec3(f["center"], "forcing.center") : Vec3{};
    c.forcing.rho = f.value("rho", 1.0);
    c.forcing.amplitude = f.value("amplitude", 0.05);
    if (f.contains("modes")) {
        for (std::size_t i = 0; i < f["modes"].size(); ++i) {
            const json& m = f["modes"][i];
            std::string p = "forcing.modes[" + std::to_string(i) + "]";
            c.forcing.coeffs.emplace_back(m.value("re", 0.0), m.value("im", 0.0));
            c.forcing.directions.push_back(
                m.contains("direction") ? to_vec3(m["direction"], p + ".direction") : Vec3{1, 0, 0});
        }
    } else {
        c.forcing.coeffs = {Complex(1, 0), Complex(0.5, 0)};
        c.forcing.directions = {Vec3{1, 0, 0}, Vec3{1, 0, 0}};
    }
    c.forcing.validate();
    if (j.contains("grid")) {
        c.grid.n = require<int>(j, "grid.n");
        c.grid.half_length = require<double>(j, "grid.half_length");
    }
    c.k_max = j.value("k_max", 4);
    if (j.contains("solver")) {
        c.solver.tol = j["solver"].value("tol", 1e-10);
        c.solver.max_iter = j["solver"].value("max_iter", 30);
        c.solver.amplitude_guard = j["solver"].value("amplitude_guard", 0.5);
    }
    c.mask_radius = j.value("mask_radius", 0.0);
    c.cutoff_S = j.value("cutoff_S", 2.0 * c.forcing.rho);
    if (j.contains("rays")) {
        for (std::size_t i = 0; i < j["rays"].size(); ++i) {
            const json& rj = j["rays"][i];
            std::string p = "rays[" + std::to_string(i) + "]";
            RaySpec r;
            std::string kind = rj.value("kind", "ray");
            if (kind == "ray") {
                r.kind = RaySpec::Kind::ray;
                r.theta = rj.value("theta", 1.0);
            } else if (kind == "wake_sheet") {
                r.kind = RaySpec::Kind::wake_sheet;
                r.sigma = rj.value("sigma", 1.0);
            } else {
                config_error(p + ".kind", "must be 'ray' or 'wake_sheet'");
            }
            if (!rj.contains("radii")) config_error(p + ".radii", "missing field");
            for (const auto& v : rj["radii"]) r.radii.push_back(v.get<double>());
            r.validate();
            c.rays.push_back(r);
        }
    } else {
        c.rays.push_back(RaySpec{RaySpec::Kind::ray, -0.99, 1.0, {8, 10, 13, 16, 20, 25, 30}});
        c.rays.push_back(RaySpec{RaySpec::Kind::ray, 1.0, 1.0, {8, 10, 13, 16, 20, 25, 30}});
        c.rays.push_back(
            RaySpec{RaySpec::Kind::wake_sheet, 0.0, 1.0, {10, 13, 16, 20, 25, 32, 40}});
    }
    if (j.contains("kernel_points"))
        for (std::size_t i = 0; i < j["kernel_points"].size(); ++i)
            c.kernel_points.push_back(
                to_vec3(j["kernel_points"][i], "kernel_points[" + std::to_string(i) + "]"));
    else
        c.kernel_points = {{1, 0, 0}, {-2, 0, 0}, {0, 2, 0}, {1, 1, 1}, {-4, 1, 0}};
    c.dump_field_flag = j.value("dump_field", false);
    c.fit_windows = j.value("fit_windows", json::object());
    return c;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json fit_to_json(const DecayFitReport& r) {
    json j;
    j["quantity"] = r.quantity;
    j["p"] = r.p;
    j["alpha"] = r.alpha;
    j["c"] = r.c;
    j["alpha_fitted"] = r.alpha_fitted;
    j["residual_rms"] = r.residual_rms;
    j["window"] = {r.window_lo, r.window_hi};
    j["samples_used"] = r.samples_used;
    j["samples_excluded"] = r.samples_excluded;
    j["max_tail_budget"] = r.max_tail_budget;
    return j;
}

json verifier_to_json(const VerifierReport& r) {
    json j;
    j["name"] = r.name;
    j["hypothesis_ok"] = r.hypothesis_ok;
    j["sup_ratio"] = r.sup_ratio;
    json pts = json::array();
    for (const auto& p : r.points) {
        pts.push_back({{"x", {p.x.x, p.x.y, p.x.z}},
                       {"value", p.value},
                       {"ratio", p.ratio},
                       {"quad_error", p.quad_error},
                       {"tail_error", p.tail_error}});
    }
    j["points"] = pts;
    return j;
}

int run_kernel_eval(const Config& c, const std::filesystem::path& out) {
    std::string csv = "x1,x2,x3,s,gamma0_frobenius,phi0,gamma_H_mode1_abs,phi_perp_t0\n";
    for (const Vec3& x : c.kernel_points) {
        double g0 = gamma0(x, c.flow).frobenius();
        double p0 = phi0(x, c.flow);
        double gh = std::abs(gamma_H(x, c.flow.mode_frequency(1), c.flow));
        double pp = phi_perp(0.0, x, c.flow, 1e-10).value;
        csv += format_double(x.x) + "," + format_double(x.y) + "," + format_double(x.z) + "," +
               format_double(wake(x)) + "," + format_double(g0) + "," + format_double(p0) + "," +
               format_double(gh) + "," + format_double(pp) + "\n";
    }
    write_text(out / "kernels.csv", csv);
    return 0;
}

int run_kernel_verify(const Config& c, std::uint64_t seed, const std::filesystem::path& out) {
    json j;
    SampleSpec ss;
    ss.seed = seed;
    KernelBoundReport rep = verify_gamma0_bounds(c.flow, ss);
    j["gamma0_bounds"] = {{"bound_shape", rep.bound_shape},
                          {"samples", rep.sample_description},
                          {"empirical_constant", rep.empirical_constant},
                          {"alpha0", rep.empirical_constant_a0},
                          {"alpha1", rep.empirical_constant_a1}};
    ConstantsRecord cr = constants_record(c.flow);
    j["constants"] = {{"C4", cr.C4}, {"C5", cr.C5}, {"C3", cr.C3}, {"K", cr.K}};
    Vec3 dir{-0.9, std::sqrt(1 - 0.81), 0};
    json mults = json::array();
    for (int ao : {0, 1})
        for (double r : {1.0, 2.0, 4.0}) {
            MultiplierReport m = multiplier_diag(ao, dir * r, 0.25, c.flow);
            mults.push_back({{"alpha_order", ao},
                             {"radius", r},
                             {"sup", m.sup},
                             {"normalized", m.normalized},
                             {"argmax_eta", m.argmax_eta}});
        }
    j["multiplier_diag"] = mults;
    json certs = json::array();
    for (double r : {1.0, 2.0, 5.0, 10.0}) {
        PhiPerpModes m = phi_perp_modes(Vec3{0, r, 0}, c.flow, 1e-8);
        certs.push_back(
            {{"radius", r}, {"K_used", m.cert.K_used}, {"tail_bound", m.cert.tail_bound}});
    }
    j["truncation_certificates"] = certs;
    write_text(out / "kernel_verify.json", j.dump(2) + "\n");
    return 0;
}

int run_conv_verify(const Config& c, std::uint64_t seed, const std::filesystem::path& out) {
    json j;
    std::vector<double> radii{5, 10, 20, 35, 50};
    j["farwig_value"] = verifier_to_json(verify_farwig(3.0, 1.0, 0, c.flow, radii));
    j["farwig_gradient"] = verifier_to_json(verify_farwig(3.5, 0.0, 1, c.flow, radii));
    j["conv_exp"] = verifier_to_json(verify_conv_exp(2.5, 4.5, 0.5, radii));
    j["wake_conv"] = verifier_to_json(verify_wake_conv(2.5, 1.0, radii));
    json shifts = json::array();
    for (auto [a, S] : {std::pair{1.0, 2.0}, {0.5, 5.0}, {2.0, 1.0}}) {
        ExpShiftReport r = verify_exp_shift(a, S, 100000, seed);
        shifts.push_back({{"a", a},
                          {"S", S},
                          {"samples", r.samples},
                          {"violations", r.violations},
                          {"min_margin_wake", r.min_margin_wake},
                          {"min_margin_abs", r.min_margin_abs}});
    }
    j["exp_shift"] = shifts;
    write_text(out / "conv_verify.json", j.dump(2) + "\n");
    return 0;
}

int run_solve(const Config& c, bool nonlinear, const std::filesystem::path& out) {
    json j;
    TimePeriodicField u;
    if (nonlinear) {
        PicardHistory hist;
        u = picard_solve(c.forcing, c.flow, c.grid, c.k_max, c.solver, &hist);
        j["iterations"] = hist.iterations;
        j["converged"] = hist.converged;
        j["history"] = hist.rel_change;
    } else {
        LinearSolveReport rep;
        u = solve_linear(c.forcing, c.flow, c.grid, c.k_max, &rep, true);
        j["wraparound_estimate"] = rep.wraparound_estimate;
    }
    j["mode_norms"] = json::array();
    for (int k = 0; k <= u.k_max; ++k) j["mode_norms"].push_back(u.mode_norm(k));
    j["max_spectral_divergence"] = max_spectral_divergence(u);
    if (!nonlinear) j["energy_identity_residual"] = energy_identity_residual(u, c.forcing);
    write_text(out / (nonlinear ? "solve_nonlinear.json" : "solve_linear.json"),
               j.dump(2) + "\n");
    if (c.dump_field_flag) dump_field(u, (out / "field.bin").string());
    return 0;
}

int run_decay_fit(const Config& c, const std::filesystem::path& out) {
    PicardHistory hist;
    TimePeriodicField u = picard_solve(c.forcing, c.flow, c.grid, c.k_max, c.solver, &hist);
    FarfieldSources s = prepare_farfield_sources(u, c.forcing);
    std::string csv;
    json fits = json::array();
    bool first = true;
    for (const RaySpec& ray : c.rays) {
        SampleTable t = sample_quantities(s, ray, SampleColumns{}, 16, c.mask_radius);
        std::string kind = ray.kind == RaySpec::Kind::ray ? "ray" : "wake_sheet";
        std::string block = sample_table_csv(t, kind);
        csv += first ? block : block.substr(block.find('\n') + 1);
        first = false;
        std::vector<double> r, sv, budget;
        for (auto& row : t.rows) {
            r.push_back(row.r);
            sv.push_back(row.s);
        }
        auto fit_col = [&](const std::string& name, auto getm, auto gete, bool alpha) {
            std::vector<double> m, b;
            for (auto& row : t.rows) {
                m.push_back(getm(row));
                b.push_back(gete(row));
            }
            try {
                DecayFitReport rep = fit_decay(r, sv, m, b, r.front(), r.back(), alpha,
                                               kind + ":" + name);
                fits.push_back(fit_to_json(rep));
            } catch (const std::exception& e) {
                fits.push_back({{"quantity", kind + ":" + name}, {"error", e.what()}});
            }
        };
        bool on_ray = ray.kind == RaySpec::Kind::ray;
        fit_col("v", [](const SampleRow& q) { return q.v_mag; },
                [](const SampleRow& q) { return q.err_v; }, false);
        fit_col("w_sup", [](const SampleRow& q) { return q.w_sup; },
                [](const SampleRow& q) { return q.err_w; }, false);
        fit_col("grad_w_sup", [](const SampleRow& q) { return q.grad_w_sup; },
                [](const SampleRow& q) { return q.err_grad_w; }, false);
        fit_col("curl_v", [](const SampleRow& q) { return q.curl_v_mag; },
                [](const SampleRow& q) { return q.err_curl_v; }, on_ray);
    }
    write_text(out / "samples.csv", csv);
    json j;
    j["picard_iterations"] = hist.iterations;
    j["fits"] = fits;
    write_text(out / "fits.json", j.dump(2) + "\n");
    return 0;
}

int run_fixedpoint_residual(const Config& c, const std::filesystem::path& out) {
    PicardHistory hist;
    TimePeriodicField u = picard_solve(c.forcing, c.flow, c.grid, c.k_max, c.solver, &hist);
    FarfieldSources s = prepare_farfield_sources(u, c.forcing);
    auto curls = curl_field_modes(u);
    CutoffSpec cut{c.cutoff_S, c.forcing.rho};
    json pts = json::array();
    double S = cut.S;
    const double h = c.grid.h();
    int written = 0;
    for (int a = 1; a < c.grid.n && written < 20; ++a) {
        // walk grid nodes in a deterministic diagonal pattern
        Vec3 x{std::round(-0.7 * a) * h, std::round(0.8 * a) * h, std::round(0.3 * a) * h};
        double rr = x.norm();
        if (rr < 1.2 * S || rr > 3.0 * S) continue;
        double t = 0.0;
        SplitParts parts = compute_Hs_Fs(x, t, s, cut);
        Vec3 curl_ref = curl_value_at_node(curls, c.grid, c.flow.period, x, t);
        Vec3 curl_split = parts.curl_steady_H + parts.curl_steady_F + parts.curl_periodic_H +
                          parts.curl_periodic_F;
        Vec3 v_ref = field_value_at_node(u, x, t);  // total field; steady split below
        Vec3 v_split = parts.vel_steady_H + parts.vel_steady_F;
        const std::size_t nn = c.grid.nodes();
        (void)nn;
        pts.push_back({{"x", {x.x, x.y, x.z}},
                       {"curl_ref", {curl_ref.x, curl_ref.y, curl_ref.z}},
                       {"curl_residual", (curl_ref - curl_split).norm()},
                       {"v_split", {v_split.x, v_split.y, v_split.z}},
                       {"v_ref_total", {v_ref.x, v_ref.y, v_ref.z}}});
        ++written;
    }
    json j;
    j["S"] = S;
    j["points"] = pts;
    write_text(out / "residual.json", j.dump(2) + "\n");
    return 0;
}

int run_selfcheck(const Config& c, std::uint64_t seed, const std::filesystem::path& out) {
    bool ok = true;
    json j;
    // exponential shift battery
    json shifts = json::array();
    for (auto [a, S] : {std::pair{1.0, 2.0}, {0.5, 5.0}, {2.0, 1.0}}) {
        ExpShiftReport r = verify_exp_shift(a, S, 100000, seed);
        ok = ok && r.violations == 0;
        shifts.push_back({{"a", a}, {"S", S}, {"violations", r.violations},
                          {"min_margin_wake", r.min_margin_wake},
                          {"min_margin_abs", r.min_margin_abs}});
    }
    j["exp_shift"] = shifts;
    // kernel identities
    Vec3 x{1.3, 0.7, -0.4};
    Complex g = gamma_H(x, 2.0, c.flow);
    double modulus_err = std::abs(
        std::abs(g) - std::exp(-sqrt_neg_mu(2.0, c.flow.lambda).imag() * x.norm() -
                               0.5 * c.flow.lambda * x.x) /
                          (4 * M_PI * x.norm()));
    ok = ok && modulus_err < 1e-14;
    j["gamma_H_modulus_error"] = modulus_err;
    ConstantsRecord cr = constants_record(c.flow);
    j["constants"] = {{"C4", cr.C4}, {"C5", cr.C5}, {"C3", cr.C3}, {"K", cr.K}};
    ok = ok && cr.C5 == std::sqrt(M_PI / c.flow.period) * cr.C4 / 2.0;
    // small solve battery
    GridSpec small{48, 12.0};
    ForcingSpec f = c.forcing;
    PicardOptions opts = c.solver;
    PicardHistory hist;
    TimePeriodicField u = picard_solve(f, c.flow, small, 2, opts, &hist);
    ok = ok && hist.converged;
    TimePeriodicField ulin = solve_linear(f, c.flow, small, 2);
    double energy_resid = energy_identity_residual(ulin, f);
    j["small_solve"] = {{"iterations", hist.iterations},
                        {"converged", hist.converged},
                        {"max_spectral_divergence", max_spectral_divergence(u)},
                        {"energy_identity_residual_linear", energy_resid}};
    ok = ok && max_spectral_divergence(u) < 1e-12;
    ok = ok && energy_resid < 1e-8;
    j["pass"] = ok;
    write_text(out / "selfcheck.json", j.dump(2) + "\n");
    // small deterministic sample table
    FarfieldSources s = prepare_farfield_sources(u, f);
    RaySpec ray{RaySpec::Kind::ray, -0.9, 1.0, {4.0, 5.0, 6.5}};
    SampleTable t = sample_quantities(s, ray);
    write_text(out / "selfcheck.csv", sample_table_csv(t, "ray"));
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-periodic Oseen kernels, flow solves, and wake-decay verification"};
    app.fallthrough();
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    app.add_option("--config", config_path, "JSON config path");
    app.add_option("--seed", seed, "seed for sampled verifiers");
    app.add_option("--out", out_dir, "output directory");
    app.require_subcommand(1);

    auto* kernel = app.add_subcommand("kernel", "kernel evaluation and verification");
    kernel->require_subcommand(1);
    auto* kernel_eval = kernel->add_subcommand("eval", "tabulate kernels at points");
    auto* kernel_verify = kernel->add_subcommand("verify", "bound and multiplier reports");
    auto* conv = app.add_subcommand("conv", "convolution lemma verifiers");
    conv->require_subcommand(1);
    auto* conv_verify = conv->add_subcommand("verify", "run all lemma verifiers");
    auto* solve = app.add_subcommand("solve", "time-periodic flow solves");
    solve->require_subcommand(1);
    auto* solve_linear_cmd = solve->add_subcommand("linear", "linear solve");
    auto* solve_nonlinear_cmd = solve->add_subcommand("nonlinear", "Picard solve");
    auto* decay = app.add_subcommand("decay", "decay sampling and fits");
    decay->require_subcommand(1);
    auto* decay_fit = decay->add_subcommand("fit", "sample rays and fit decay rates");
    auto* fixedpoint = app.add_subcommand("fixedpoint", "fixed-point splitting");
    fixedpoint->require_subcommand(1);
    auto* fp_residual = fixedpoint->add_subcommand("residual", "H_S/F_S residual report");
    auto* selfcheck = app.add_subcommand("selfcheck", "fast acceptance battery");

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = json::object();
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw std::runtime_error("cannot open config " + config_path);
            is >> cfg;
        } else {
            cfg["flow"] = {{"lambda", 1.0}, {"period", 2 * M_PI}};
        }
        if (!cfg.contains("flow")) config_error("flow", "missing field");
        Config c = parse_config(cfg);
        std::filesystem::path out(out_dir);
        std::filesystem::create_directories(out);

        if (kernel_eval->parsed()) return run_kernel_eval(c, out);
        if (kernel_verify->parsed()) return run_kernel_verify(c, seed, out);
        if (conv_verify->parsed()) return run_conv_verify(c, seed, out);
        if (solve_linear_cmd->parsed()) return run_solve(c, false, out);
        if (solve_nonlinear_cmd->parsed()) return run_solve(c, true, out);
        if (decay_fit->parsed()) return run_decay_fit(c, out);
        if (fp_residual->parsed()) return run_fixedpoint_residual(c, out);
        if (selfcheck->parsed()) return run_selfcheck(c, seed, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
