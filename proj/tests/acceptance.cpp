// End-to-end acceptance run. One PASS/FAIL line per criterion; exit status is
// the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>

#include "wavestab/config.hpp"
#include "wavestab/verify.hpp"

using namespace wavestab;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
    std::printf("criterion %d %s: %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

NewtonOptions quiet(NewtonOptions o) {
    o.check_resolution = false;
    return o;
}

WaveState wave_at(const BranchRecord& b, double alpha) {
    const BranchPoint& p = b.points[b.nearest_alpha(alpha)];
    const Spectral sp(p.wave.grid, b.dealias);
    return newton_solve_amplitude(sp, p.wave.w, p.wave.lambda_p, alpha * p.wave.grid.h, quiet(b.tolerances));
}

// c +/- dc neighbours, re-solved at fixed speed.
struct Trio {
    Observables minus, mid, plus;
};

Trio trio(const BranchRecord& b, const WaveState& w, double dc) {
    const Spectral sp(w.grid, b.dealias);
    const NewtonOptions o = quiet(b.tolerances);
    Trio t;
    t.mid = observables(sp, w);
    t.minus = observables(sp, newton_solve(sp, w.w, lambda_from_speed(w.grid, w.c - dc), o));
    t.plus = observables(sp, newton_solve(sp, w.w, lambda_from_speed(w.grid, w.c + dc), o));
    return t;
}

}  // namespace

int main() {
    const RunConfig cfg;
    const double h = cfg.grid.h;

    // 1: KdV scaling of the three lowest eigenvalues.
    {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        double prev = INFINITY;
        std::string detail;
        for (double rho : {0.20, 0.15, 0.10}) {
            const KdvScalingResult r = kdv_scaling_check(rho);
            ok = ok && r.max_relative_error <= 0.15 && r.max_relative_error < prev;
            prev = r.max_relative_error;
            detail += fmt("rho %.2f err %.3f; ", rho, r.max_relative_error);
        }
        const double secs = since(t0);
        verdict(1, ok && secs < 60.0, detail + fmt("%.1f s", secs));
    }

    // 2, 3: landmarks from the default branch.
    const auto tb = std::chrono::steady_clock::now();
    const Spectral sp0(cfg.grid, cfg.dealias);
    BranchRecord branch = continue_branch(initial_wave(sp0, cfg.start_froude, cfg.newton), cfg.target, cfg.step,
                                          cfg.newton, cfg.dealias);
    branch_derivatives_and_extrema(branch);
    const double branch_secs = since(tb);
    const auto em = branch.first_energy_max();
    const auto cm = branch.first_speed_max();
    std::printf("branch: %zu points to alpha %.4f in %.1f s, final M %d\n", branch.points.size(),
                branch.points.back().obs.alpha, branch_secs, branch.points.back().wave.grid.M);
    if (em) {
        const bool ok = std::abs(em->alpha - 0.7824) <= 0.010 && std::abs(em->omega_alt - 0.88) <= 0.02 &&
                        branch_secs <= 900.0;
        verdict(2, ok, fmt("energy max alpha %.4f +- %.4f, omega(q_c/c) %.4f, omega(q_c^2/gh) %.4f, branch %.0f s",
                           em->alpha, em->alpha_uncertainty, em->omega, em->omega_alt, branch_secs));
    } else {
        verdict(2, false, "no energy maximum flagged");
    }
    if (em && cm) {
        const bool ok = std::abs(cm->alpha - 0.790) <= 0.010 && std::abs(cm->omega_alt - 0.917) <= 0.02 &&
                        em->alpha < cm->alpha;
        verdict(3, ok, fmt("speed max alpha %.4f +- %.4f, omega(q_c/c) %.4f, omega(q_c^2/gh) %.4f; E-max first: %s",
                           cm->alpha, cm->alpha_uncertainty, cm->omega, cm->omega_alt,
                           em->alpha < cm->alpha ? "yes" : "no"));
    } else {
        verdict(3, false, "no speed maximum flagged");
    }

    // 4: moving-kernel formula at alpha = 0.5.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const WaveState w = wave_at(branch, 0.5);
        const double dc = 1e-3 * w.c;
        const Trio t = trio(branch, w, dc);
        const double dE_dc = (t.plus.E - t.minus.E) / (2 * dc);
        const PreparedWave pw = prepare_stability_wave(w, branch.dealias, cfg.stability_grid);
        const SurfaceFields sf = surface_fields(pw.grid, pw.wave);
        try {
            const MovingKernel mk = track_k_lambda(pw.grid, sf, dE_dc, default_k_lambdas(sf.c, h, cfg.k_lambda_count));
            verdict(4, mk.relative_error() <= 0.05,
                    fmt("k/lambda^2 -> %.4f +- %.4f, formula %.4f, rel. error %.4f, %.1f s", mk.extrapolated,
                        mk.error_bar, mk.rhs, mk.relative_error(), since(t0)));
        } catch (const Error& e) {
            verdict(4, false, e.what());
        }
    }

    // 5, 6: growth search across the flagged window and at controls.
    std::map<double, std::optional<double>> lam;
    if (em && cm) {
        const auto t0 = std::chrono::steady_clock::now();
        TransitionOptions to;
        to.grid = cfg.stability_grid;
        to.search = cfg.growth;
        const TransitionReport tr = transition_scan(branch, to);
        for (const TransitionRow& r : tr.rows) {
            std::printf("  window alpha %.5f omega_alt %.4f n %d lambda* %s\n", r.alpha, r.omega_alt, r.grid_size,
                        r.lambda_star ? fmt("%.6e", *r.lambda_star).c_str() : "none");
            lam[r.alpha] = r.lambda_star;
        }
        TransitionOptions ctl = to;
        ctl.alphas = {0.3, 0.5, 0.7};
        const TransitionReport cr = transition_scan(branch, ctl);
        bool in_window = false;
        for (const auto& [a, l] : lam)
            if (a > 0.7824 && a < 0.790 && l && *l > 0) in_window = true;
        bool controls_clean = cr.rows.size() == 3;
        std::string ctl_text;
        for (const TransitionRow& r : cr.rows) {
            controls_clean = controls_clean && !r.lambda_star;
            ctl_text += fmt("%.2f:%s ", r.alpha, r.lambda_star ? "unstable" : "none");
        }
        verdict(5, in_window && controls_clean,
                fmt("growing mode inside (0.7824, 0.790): %s; controls %s; %.0f s", in_window ? "yes" : "no",
                    ctl_text.c_str(), since(t0)));
        verdict(6, tr.monotone && tr.min_max_ratio < 0.10,
                fmt("lambda* increasing with alpha: %s, min/max %.4f, linear zero at alpha %.4f +- %.4f vs energy max "
                    "%.4f",
                    tr.monotone ? "yes" : "no", tr.min_max_ratio, tr.zero_alpha, tr.zero_alpha_error,
                    tr.energy_max_alpha));
    } else {
        verdict(5, false, "window undefined");
        verdict(6, false, "window undefined");
    }

    // 7: Benjamin relation at five mid-branch points.
    {
        double worst = 0.0;
        for (double a : {0.3, 0.4, 0.5, 0.6, 0.7}) {
            const WaveState w = wave_at(branch, a);
            const double dc = 1e-3 * w.c;
            const Trio t = trio(branch, w, dc);
            const double dE = (t.plus.E - t.minus.E) / (2 * dc);
            const double dP = (t.plus.P - t.minus.P) / (2 * dc);
            worst = std::max(worst, std::abs(dE + w.c * dP) / std::abs(dE));
        }
        verdict(7, worst <= 0.01, fmt("max |dE/dc + c dP/dc| / |dE/dc| = %.2e over alpha 0.3..0.7", worst));
    }

    // 8: structural identities from the invariant suite.
    {
        const std::set<std::string> wanted = {"kernel_residual",
                                              "plotnikov_potential_identity",
                                              "M_identity",
                                              "translation_kernel",
                                              "appendix_identity",
                                              "appendix_identity_second_order",
                                              "flat_no_growing_mode",
                                              "N_lower_bound_random",
                                              "E_weighted_contraction"};
        const auto results = run_invariant_suite(cfg);
        int seen = 0;
        std::string bad;
        for (const InvariantResult& r : results) {
            if (!wanted.count(r.name)) continue;
            ++seen;
            if (!r.passed) bad += r.name + " ";
        }
        verdict(8, seen == static_cast<int>(wanted.size()) && bad.empty(),
                bad.empty() ? fmt("%d identities within tolerance", seen) : "failed: " + bad);
    }

    // 9: second negative direction past the speed maximum.
    if (cm) {
        const BranchPoint& last = branch.points.back();
        const PreparedWave pw = prepare_stability_wave(last.wave, branch.dealias, cfg.stability_grid);
        const StabilityReport r = spectrum_report(pw.grid, surface_fields(pw.grid, pw.wave));
        verdict(9, last.obs.alpha > cm->alpha && r.n_minus >= 2,
                fmt("alpha %.4f (speed max %.4f): n_minus %d, lowest eigenvalues %.4f %.4f %.2e", last.obs.alpha,
                    cm->alpha, r.n_minus, r.a0_eigenvalues[0], r.a0_eigenvalues[1], r.a0_eigenvalues[2]));
    } else {
        verdict(9, false, "no speed maximum flagged");
    }

    std::printf("%d criteria failed\n", failures);
    return failures;
}
