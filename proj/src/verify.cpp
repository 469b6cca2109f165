#include "wavestab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "wavestab/errors.hpp"
#include "wavestab/linalg.hpp"
#include "wavestab/serialize.hpp"

namespace wavestab {

using nlohmann::json;

namespace {

class Suite {
public:
    void add(std::string name, bool ok, double value, double threshold, std::string detail = {}) {
        out.push_back({std::move(name), ok, value, threshold, std::move(detail)});
    }
    // value <= threshold passes
    void at_most(std::string name, double value, double threshold, std::string detail = {}) {
        add(std::move(name), std::isfinite(value) && value <= threshold, value, threshold, std::move(detail));
    }
    void fail(std::string name, const std::string& why) { add(std::move(name), false, NAN, NAN, why); }
    std::vector<InvariantResult> out;
};

std::string str(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

// Smooth random zero-mean field with modes below M/8.
Field random_smooth(const Spectral& sp, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Spectrum F(sp.size() / 2 + 1, 0.0);
    for (int m = 1; m < sp.size() / 8; ++m) F[m] = std::complex<double>(nd(rng), nd(rng)) / (1.0 + 0.05 * m);
    return sp.inverse(F);
}

double max_symbol(const GridSpec& g) { return symbol_n(g.wavenumber(g.M / 2), g.h); }

Field random_field(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Field f(n);
    for (int i = 0; i < n; ++i) f[i] = nd(rng);
    return f;
}

void spectral_invariants(Suite& s, const RunConfig& cfg, std::mt19937_64& rng) {
    const Spectral sp(cfg.grid, cfg.dealias);
    const double h = cfg.grid.h;
    const double nmax = max_symbol(cfg.grid);
    double nmin = INFINITY;
    for (int m = 0; m <= cfg.grid.M / 2; ++m) nmin = std::min(nmin, symbol_n(cfg.grid.wavenumber(m), h));
    s.at_most("symbol_min_equals_inverse_depth", std::abs(nmin - 1.0 / h), 1e-14);

    double worst = INFINITY, sym = 0.0, parseval = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Field f = random_field(sp.size(), rng);
        const Field g = random_field(sp.size(), rng);
        const Field Nf = sp.apply_N(f);
        worst = std::min(worst, sp.inner(Nf, f) / (sp.inner(f, f) / h));
        sym = std::max(sym, std::abs(sp.inner(Nf, g) - sp.inner(f, sp.apply_N(g))) / (sp.norm(f) * sp.norm(g)));
        parseval = std::max(parseval, sp.norm(Nf) / (nmax * sp.norm(f)));
    }
    s.add("N_lower_bound_random", worst >= 1.0 - 1e-12, worst, 1.0, "min <Nf,f> / (|f|^2/h) over 100 fields");
    s.at_most("N_symmetry_random", sym, 1e-12);
    s.at_most("N_parseval_bound", parseval, 1.0 + 1e-12);

    double comm = 0.0;
    for (int i = 0; i < 10; ++i) {
        const Field f = random_smooth(sp, rng);
        const Field Nf = sp.apply_N(f);
        const double a = (sp.apply_C(sp.apply_ddxi(f)) - Nf).cwiseAbs().maxCoeff();
        const double b = (sp.apply_ddxi(sp.apply_C(f)) - Nf).cwiseAbs().maxCoeff();
        comm = std::max(comm, std::max(a, b) / Nf.cwiseAbs().maxCoeff());
    }
    s.at_most("C_ddxi_equals_N", comm, 1e-12);
}

// Amplitude ramp from the KdV start wave; resolution checks are left to the suite.
WaveState ramp_to(const Spectral& sp, const RunConfig& cfg, double alpha) {
    NewtonOptions o = cfg.newton;
    o.check_resolution = false;
    WaveState s = initial_wave(sp, cfg.start_froude, o);
    Field w_prev = s.w;
    double l_prev = s.lambda_p, a_prev = s.amplitude();
    for (double a = std::min(alpha, s.amplitude() + 0.05); ; a = std::min(alpha, a + 0.05)) {
        Field guess = s.w;
        double lg = s.lambda_p;
        if (a_prev < s.amplitude()) {
            const double r = (a - s.amplitude()) / (s.amplitude() - a_prev);
            guess = s.w + r * (s.w - w_prev);
            lg = s.lambda_p + r * (s.lambda_p - l_prev);
        }
        w_prev = s.w;
        l_prev = s.lambda_p;
        a_prev = s.amplitude();
        s = newton_solve_amplitude(sp, guess, lg, a * sp.grid().h, o);
        if (a >= alpha) break;
    }
    return s;
}

Field jacobian_dense_apply(const OperatorGrid& grid, const SurfaceFields& sf, const Field& v) {
    const double beta = sf.lambda_p / grid.h();
    const Field Nv = grid.N() * v;
    return Nv - beta * (v + v.cwiseProduct(sf.b_tilde) + sf.w.cwiseProduct(Nv) + grid.N() * sf.w.cwiseProduct(v));
}

void wave_invariants(Suite& s, const RunConfig& cfg, std::mt19937_64& rng, const Spectral& sp,
                     const WaveState& wave, const BranchRecord& trio) {
    const GridSpec& g = cfg.grid;
    // Gradient of the functional against central differences.
    double grad = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Field w = 0.3 * random_smooth(sp, rng) / 10.0;
        const Field v = random_smooth(sp, rng);
        const double lp = 0.8;
        const double eps = 1e-5;
        const double fd = (functional_J(sp, w + eps * v, lp) - functional_J(sp, w - eps * v, lp)) / (2 * eps);
        const double an = sp.inner(babenko_residual(sp, w, lp), v);
        grad = std::max(grad, std::abs(fd - an) / std::abs(an));
    }
    s.at_most("gradient_matches_functional", grad, 1e-6, "20 random fields, central differences");

    double sym = 0.0;
    for (int i = 0; i < 10; ++i) {
        const Field u = random_smooth(sp, rng), v = random_smooth(sp, rng);
        const double a = sp.inner(babenko_jacobian_apply(sp, wave.w, wave.lambda_p, u), v);
        const double b = sp.inner(u, babenko_jacobian_apply(sp, wave.w, wave.lambda_p, v));
        sym = std::max(sym, std::abs(a - b) / (sp.norm(u) * sp.norm(v)));
    }
    s.at_most("jacobian_symmetry", sym, 1e-10);

    s.at_most("wave_residual", babenko_residual(sp, wave.w, wave.lambda_p).cwiseAbs().maxCoeff(), cfg.newton.tol * 10);
    s.at_most("wave_even", (wave.w - symmetrize(wave.w)).cwiseAbs().maxCoeff() / wave.w.cwiseAbs().maxCoeff(), 1e-12);
    const Observables ob = observables(sp, wave);
    s.add("supercritical", ob.F > 1.0 && ob.delta0 > 0.0, ob.F, 1.0, "F > 1 and delta0 > 0");
    s.add("below_highest_wave", ob.alpha < 0.8332, ob.alpha, 0.8332);
    const Field b = (1.0 + sp.apply_N(wave.w).array()).matrix();
    s.add("depth_factor_positive", b.minCoeff() > 0.0, b.minCoeff(), 0.0, "min of 1 + N w");

    const ResolutionReport rr = resolution_report(sp, wave.w, cfg.newton);
    {
        std::ostringstream d;
        d << "tail ratio " << rr.tail_ratio << " (tol " << cfg.newton.tail_tol << "), spectral ratio "
          << rr.spectral_ratio << " (tol " << cfg.newton.spectral_tol << ") at L = " << g.L << ", M = " << g.M;
        if (!rr.tail_ok) d << "; tail too large: increase L";
        if (!rr.spectral_ok) d << "; spectrum not decayed: increase M";
        const double worst = std::max(rr.tail_ratio / cfg.newton.tail_tol, rr.spectral_ratio / cfg.newton.spectral_tol);
        s.add("tail_tolerance", rr.tail_ok && rr.spectral_ok, worst, 1.0, d.str());
    }

    // Translation mode of the linearized equation; truncation error measured
    // by the residual of the translated-difference quotient.
    const Field wp = sp.apply_ddxi(wave.w);
    const double jw = sp.norm(babenko_jacobian_apply(sp, wave.w, wave.lambda_p, wp)) / sp.norm(wp);
    const double trunc = std::max(rr.spectral_ratio, cfg.newton.tol) * max_symbol(g);
    s.at_most("translation_kernel", jw, 10.0 * trunc, "||J w'|| / ||w'|| against 10 x truncation");

    // Benjamin relation and the appendix identities from the c +/- dc trio.
    const BranchPoint &pm = trio.points[0], &p0 = trio.points[1], &pp = trio.points[2];
    const double dc = pp.wave.c - pm.wave.c;
    const double dEdc = (pp.obs.E - pm.obs.E) / dc;
    const double dPdc = (pp.obs.P - pm.obs.P) / dc;
    s.at_most("benjamin_relation", std::abs(dEdc + p0.wave.c * dPdc) / std::abs(dEdc), 1e-2);

    try {
        const double r1 = appendix_identity_check(trio, 1, 0.5 * dc);
        s.at_most("appendix_identity", r1, 1e-3);
        const DPdcCheck d = dPdc_formula_check(trio, 1, 0.5 * dc);
        s.at_most("dPdc_formula", d.relative_error, 1e-2,
                  "formula " + str(d.formula) + " vs difference " + str(d.finite_difference));
        const double r2 = appendix_identity_check(trio, 1, 0.25 * dc);
        const double ratio = r1 / r2;
        s.add("appendix_identity_second_order", ratio > 3.0 && ratio < 5.0, ratio, 4.0,
              "residual ratio when the c step halves");
    } catch (const Error& e) {
        s.fail("appendix_identity", e.what());
    }
}

void surface_and_operator_invariants(Suite& s, const RunConfig& cfg, const PreparedWave& pw, double dE_dc) {
    const OperatorGrid& grid = pw.grid;
    SurfaceFields sf = surface_fields(grid, pw.wave);
    if (cfg.flip_P_ey_sign) sf.P_ey = -sf.P_ey;

    s.at_most("plotnikov_potential_identity",
              (sf.potential() + sf.a_plot).cwiseAbs().maxCoeff() / sf.a_plot.cwiseAbs().maxCoeff(), 1e-8,
              "b P_ey / psi_ey^2 + a");
    const Field eta_x = sf.wp.cwiseQuotient(sf.b);
    s.at_most("surface_relation", (sf.psi_ex + eta_x.cwiseProduct(sf.psi_ey)).cwiseAbs().maxCoeff() / sf.c, 1e-12,
              "psi_ex + eta_x psi_ey");
    s.add("psi_ey_positive", sf.psi_ey.minCoeff() > 0.0, sf.psi_ey.minCoeff(), 0.0);
    const int last = grid.size() - 1;
    const double edge = std::max({sf.e[0], sf.e[last]});
    s.at_most("coefficients_decay_at_edge", edge, 1e-8, "max(|a~|, |b~|, |c~|) at the far nodes");
    const Field Mpsi = apply_M(grid, sf, sf.psi_ex) + sf.c * sf.wp;
    s.at_most("M_identity", grid.norm(Mpsi) / grid.norm(sf.c * sf.wp), 1e-8, "M psi_ex = -c w'");

    const StabilityReport rep = spectrum_report(grid, sf, {{10.0 * sf.c / grid.h()}, 40, 1});
    s.at_most("A0_symmetric", rep.a0_asymmetry, 1e-12);
    s.at_most("kernel_residual", rep.kernel_residual, 1e-6, "||A0 psi_ex|| / ||psi_ex||");
    s.add("n_minus_mid_branch", rep.n_minus == 1, rep.n_minus, 1);
    s.at_most("edge_potential", rep.edge_potential_gap, 1e-6, "|b P_ey/psi_ey^2 + g/c^2| at the far end");
    s.add("kernel_dimension_one", rep.smallest_singular[1] > 1e-4, rep.smallest_singular[1], 1e-4,
          "second smallest singular value of A0");
    const Field Jw = jacobian_dense_apply(grid, sf, sf.wp);
    s.at_most("translation_kernel_line_grid", grid.norm(Jw) / grid.norm(sf.wp), 1e-6);
    if (!rep.spectra.empty()) {
        const LambdaSpectrum& big = rep.spectra.front();
        s.add("no_eigenvalue_at_large_lambda", !big.failed && big.min_real > 0.0, big.min_real, 0.0,
              "min Re at lambda = 10 c/h");
    }

    // Weighted structure of D_tilde and E^{lambda,+-}.
    double anti = 0.0, contraction = 0.0, pairs = 0.0;
    for (double scale : {0.01, 0.1, 1.0}) {
        const double lam = scale * sf.c / grid.h();
        const OperatorBundle ob = assemble_A_lambda(grid, sf, lam);
        const double dn = weighted_norm(grid, sf, ob.D_tilde);
        anti = std::max(anti, weighted_antisymmetry_defect(grid, sf, ob.D_tilde) / dn);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(grid.size(), grid.size());
        for (const Eigen::MatrixXd* E : {&ob.E_plus, &ob.E_minus}) {
            contraction = std::max(contraction, weighted_norm(grid, sf, *E));
            contraction = std::max(contraction, weighted_norm(grid, sf, I - *E));
        }
        const auto ev = general_eigenvalues(ob.A_lambda);
        const double rad = std::abs(*std::max_element(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); }));
        for (const auto& z : ev) {
            if (std::abs(z.imag()) <= 1e-8 * rad) continue;
            double best = INFINITY;
            for (const auto& y : ev) best = std::min(best, std::abs(y - std::conj(z)));
            pairs = std::max(pairs, best / rad);
        }
    }
    s.at_most("D_tilde_weighted_antisymmetry", anti, 1e-8);
    s.at_most("E_weighted_contraction", contraction, 1.0 + 1e-8, "max weighted norm of E+-, 1 - E+-");
    s.at_most("conjugate_pairs", pairs, 1e-8);

    // Strong limits on a fixed smooth field; odd, so it lies in the range of D_tilde.
    const Eigen::MatrixXd A0 = assemble_A0(grid, sf);
    const Field v = (grid.xi().array() * (-grid.xi().array().square() / 4.0).exp()).matrix();
    std::vector<double> small, large;
    for (double lam : {1e-1, 1e-2, 1e-3, 1e-4}) small.push_back(grid.norm((assemble_A_lambda_fast(grid, sf, lam).A - A0) * v));
    for (double lam : {1e1, 1e2, 1e3, 1e4}) large.push_back(grid.norm((assemble_A_lambda_fast(grid, sf, lam).A - grid.N()) * v));
    const bool mono_small = std::is_sorted(small.rbegin(), small.rend());
    const bool mono_large = std::is_sorted(large.rbegin(), large.rend());
    std::string ds;
    for (double x : small) ds += str(x) + " ";
    s.add("A_lambda_to_A0", mono_small && small.back() < 1e-2 * small.front(), small.back() / small.front(), 1e-2,
          "monotone decrease over lambda = 1e-1..1e-4: " + ds);
    s.add("A_lambda_to_N", mono_large && large.back() < 1e-2 * large.front(), large.back() / large.front(), 1e-2,
          "monotone decrease over lambda = 1e1..1e4");

    try {
        const MovingKernel mk = track_k_lambda(grid, sf, dE_dc, default_k_lambdas(sf.c, grid.h(), cfg.k_lambda_count));
        s.at_most("moving_kernel_formula", mk.relative_error(), 0.05,
                  "extrapolated " + str(mk.extrapolated) + " vs " + str(mk.rhs));
        const double first = std::abs(mk.samples.front().k / mk.samples.front().lambda);
        const double lastv = std::abs(mk.samples.back().k / mk.samples.back().lambda);
        s.add("k_lambda_over_lambda_vanishes", first < 0.1 * lastv, first / lastv, 0.1,
              "|k/lambda| at the smallest over the largest tracked lambda");
        const auto gm = find_growing_mode(grid, sf, cfg.growth);
        s.add("mid_branch_no_growing_mode", !gm, gm ? gm->lambda_star : 0.0, 0.0,
              "parity of sign det A_lambda constant over the scan");
    } catch (const Error& e) {
        s.fail("moving_kernel_formula", e.what());
    }
}

void flat_invariants(Suite& s, const RunConfig& cfg) {
    GridSpec gs = cfg.grid;
    gs.M = 256;
    const OperatorGrid grid = OperatorGrid::periodic(gs);
    GridWave flat;
    flat.w = Field::Zero(gs.M);
    flat.lambda_p = 0.8;
    flat.c = std::sqrt(gs.g * gs.h / flat.lambda_p);
    SurfaceFields sf = surface_fields(grid, flat);
    if (cfg.flip_P_ey_sign) sf.P_ey = -sf.P_ey;
    const double delta0 = 1.0 / gs.h - gs.g / (flat.c * flat.c);
    const StabilityReport rep = spectrum_report(grid, sf, {{0.01, 0.1, 1.0}, 40, 1});
    s.at_most("flat_A0_bottom_equals_delta0", std::abs(rep.a0_eigenvalues[0] - delta0), 1e-12);
    s.add("flat_n_minus_zero", rep.n_minus == 0 && rep.a0_eigenvalues[0] > 0, rep.n_minus, 0);
    double worst = INFINITY;
    for (const LambdaSpectrum& l : rep.spectra) worst = std::min(worst, l.min_real);
    s.add("flat_A_lambda_right_of_delta0", worst >= delta0 * (1 - 1e-8), worst, delta0);
    const Field Mf = apply_M(grid, sf, sf.psi_ey);
    s.at_most("flat_M_identity", (Mf - sf.psi_ey).cwiseAbs().maxCoeff(), 1e-14);
    const auto gm = find_growing_mode(grid, sf, cfg.growth);
    s.add("flat_no_growing_mode", !gm, gm ? gm->lambda_star : 0.0, 0.0, "dispersion relation has no real root");
}

void kdv_invariants(Suite& s) {
    double prev = INFINITY;
    bool improving = true;
    for (double rho : {0.2, 0.15, 0.1}) {
        const KdvScalingResult r = kdv_scaling_check(rho);
        s.at_most("kdv_scaling_rho_" + str(rho), r.max_relative_error, 0.15,
                  "eigenvalues " + str(r.eigenvalues[0]) + ", " + str(r.eigenvalues[1]) + ", " + str(r.eigenvalues[2]));
        improving = improving && r.max_relative_error < prev;
        prev = r.max_relative_error;
    }
    s.add("kdv_scaling_improves", improving, prev, 0.15, "error decreases with rho");
}

}  // namespace

std::vector<InvariantResult> run_invariant_suite(const RunConfig& cfg) {
    cfg.validate();
    Suite s;
    std::mt19937_64 rng(cfg.seed);
    spectral_invariants(s, cfg, rng);

    const Spectral sp(cfg.grid, cfg.dealias);
    try {
        const WaveState wave = ramp_to(sp, cfg, 0.5);
        NewtonOptions o = cfg.newton;
        o.check_resolution = false;
        const double dc = 2e-3;
        BranchRecord trio;
        trio.tolerances = cfg.newton;
        trio.dealias = cfg.dealias;
        for (double shift : {-dc, 0.0, dc}) {
            BranchPoint p;
            p.wave = shift == 0.0 ? wave : newton_solve(sp, wave.w, lambda_from_speed(cfg.grid, wave.c + shift), o);
            p.obs = observables(sp, p.wave);
            trio.points.push_back(p);
        }
        wave_invariants(s, cfg, rng, sp, wave, trio);
        const double dE_dc = (trio.points[2].obs.E - trio.points[0].obs.E) / (trio.points[2].wave.c - trio.points[0].wave.c);
        const PreparedWave pw = prepare_stability_wave(wave, cfg.dealias, cfg.stability_grid);
        surface_and_operator_invariants(s, cfg, pw, dE_dc);
    } catch (const Error& e) {
        s.fail("mid_branch_wave", std::string(e.what()) + " (L = " + str(cfg.grid.L) + ", M = " +
                                       std::to_string(cfg.grid.M) + "; increase M if the grid is coarse)");
    }
    flat_invariants(s, cfg);
    kdv_invariants(s);
    return s.out;
}

json invariants_to_json(const std::vector<InvariantResult>& r) {
    json a = json::array();
    int failed = 0;
    for (const InvariantResult& x : r) {
        a.push_back({{"name", x.name},
                     {"passed", x.passed},
                     {"value", std::isfinite(x.value) ? json(x.value) : json(nullptr)},
                     {"threshold", std::isfinite(x.threshold) ? json(x.threshold) : json(nullptr)},
                     {"detail", x.detail}});
        failed += !x.passed;
    }
    return {{"invariants", a}, {"total", r.size()}, {"failed", failed}, {"passed", failed == 0}};
}

}  // namespace wavestab
