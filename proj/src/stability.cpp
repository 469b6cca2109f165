#include "wavestab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wavestab/errors.hpp"
#include "wavestab/linalg.hpp"

namespace wavestab {

namespace {

// Weighted inner product and norm in L^2(d xi).
double qdot(const OperatorGrid& grid, const Field& a, const Field& b) { return grid.inner(a, b); }
double qnorm(const OperatorGrid& grid, const Field& a) { return grid.norm(a); }

// Real vector from a Ritz vector of a (numerically) real eigenvalue.
Field real_vector(const Eigen::VectorXcd& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const std::complex<double> phase = std::conj(v[k]) / std::abs(v[k]);
    return (v * phase).real();
}

double abs_overlap(const OperatorGrid& grid, const Field& a, const Field& b) {
    return std::abs(qdot(grid, a, b)) / (qnorm(grid, a) * qnorm(grid, b));
}

struct NearZero {
    double value = 0.0;
    Field vector;
    double overlap = 0.0;
    double runner_up = 0.0;
};

// Among the Ritz pairs of A nearest 0, the real one best aligned with `seed`.
NearZero real_mode_near_zero(const OperatorGrid& grid, const DenseLU& lu, const Eigen::MatrixXd& A,
                             const Field& seed, double radius, int wanted) {
    const auto ritz = shift_invert_arnoldi(lu, A, 0.0, seed, wanted);
    NearZero best;
    best.overlap = -1.0;
    for (const RitzPair& r : ritz) {
        if (std::abs(r.value.imag()) > 1e-8 * radius) continue;
        const Field v = real_vector(r.vector);
        const double ov = abs_overlap(grid, v, seed);
        if (ov > best.overlap) {
            best.runner_up = std::max(best.runner_up, best.overlap);
            best.value = r.value.real();
            best.vector = v;
            best.overlap = ov;
        } else {
            best.runner_up = std::max(best.runner_up, ov);
        }
    }
    return best;  // overlap < 0: every nearby Ritz value is complex
}

// Real eigenvalue of smallest modulus; the seed only starts the Krylov space.
NearZero smallest_real_mode(const DenseLU& lu, const Eigen::MatrixXd& A, const Field& seed, double radius) {
    const auto ritz = shift_invert_arnoldi(lu, A, 0.0, seed, 4);
    for (const RitzPair& r : ritz) {
        if (std::abs(r.value.imag()) > 1e-8 * radius) continue;
        NearZero out;
        out.value = r.value.real();
        out.vector = real_vector(r.vector);
        return out;
    }
    throw BracketingError("no real eigenvalue near 0 inside the bracket");
}

double spectral_radius_bound(const Eigen::MatrixXd& A) { return norm2_estimate(A, 20); }

}  // namespace

Eigen::MatrixXd assemble_A0(const OperatorGrid& grid, const SurfaceFields& sf) {
    Eigen::MatrixXd A = grid.N();
    A.diagonal() += sf.potential();
    return A;
}

LambdaOperator assemble_A_lambda_fast(const OperatorGrid& grid, const SurfaceFields& sf, double lambda) {
    if (!(lambda > 0.0)) throw AssemblyError("assemble_A_lambda: lambda must be positive");
    Eigen::MatrixXd B = grid.D();
    B.diagonal() += lambda * sf.b.cwiseQuotient(sf.psi_ey);
    const DenseLU lu(std::move(B));
    if (lu.singular()) throw AssemblyError("assemble_A_lambda: lambda + D_tilde is singular");
    LambdaOperator op;
    op.lambda = lambda;
    op.C_tilde = grid.D();
    lu.solve_in_place(op.C_tilde);
    op.C_tilde = sf.psi_ey.cwiseInverse().asDiagonal() * op.C_tilde;
    const Eigen::MatrixXd PC = sf.P_ey.asDiagonal() * op.C_tilde;
    op.A = grid.N();
    op.A.noalias() += sf.b.asDiagonal() * (op.C_tilde * PC);
    return op;
}

OperatorBundle assemble_A_lambda(const OperatorGrid& grid, const SurfaceFields& sf, double lambda) {
    if (!(lambda > 0.0)) throw AssemblyError("assemble_A_lambda: lambda must be positive");
    const int n = grid.size();
    OperatorBundle out;
    out.lambda = lambda;
    out.D_tilde = sf.b.cwiseInverse().asDiagonal() * grid.D() * sf.psi_ey.asDiagonal();
    auto resolvent = [&](double sign) {
        Eigen::MatrixXd S = sign * out.D_tilde;
        S.diagonal().array() += lambda;
        const DenseLU lu(std::move(S));
        if (lu.singular()) throw AssemblyError("assemble_A_lambda: lambda +/- D_tilde is singular");
        Eigen::MatrixXd E = lambda * Eigen::MatrixXd::Identity(n, n);
        lu.solve_in_place(E);
        return E;
    };
    out.E_plus = resolvent(1.0);
    out.E_minus = resolvent(-1.0);
    Eigen::MatrixXd one_minus = -out.E_plus;
    one_minus.diagonal().array() += 1.0;
    out.C_tilde = one_minus * sf.psi_ey.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd PC = sf.P_ey.asDiagonal() * out.C_tilde;
    out.A_lambda = grid.N();
    out.A_lambda.noalias() += sf.b.asDiagonal() * (out.C_tilde * PC);
    return out;
}

double weighted_norm(const OperatorGrid& grid, const SurfaceFields& sf, const Eigen::MatrixXd& T) {
    const Field s = sf.b.cwiseProduct(sf.psi_ey).cwiseProduct(grid.weights()).cwiseSqrt();
    const Eigen::MatrixXd S = s.asDiagonal() * T * s.cwiseInverse().asDiagonal();
    return singular_values(S).maxCoeff();
}

double weighted_antisymmetry_defect(const OperatorGrid& grid, const SurfaceFields& sf,
                                    const Eigen::MatrixXd& D_tilde) {
    const Field s = sf.b.cwiseProduct(sf.psi_ey).cwiseProduct(grid.weights()).cwiseSqrt();
    const Eigen::MatrixXd S = s.asDiagonal() * D_tilde * s.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd sym = S + S.transpose();
    return singular_values(sym).maxCoeff();
}

StabilityReport spectrum_report(const OperatorGrid& grid, const SurfaceFields& sf, const SpectrumOptions& opts) {
    StabilityReport rep;
    rep.grid_kind = grid.kind() == OperatorGrid::Kind::line ? "line" : "periodic";
    rep.grid_size = grid.size();
    rep.ell = grid.ell();
    rep.alpha = sf.w[grid.center()] / grid.h();
    rep.c = sf.c;
    rep.delta0 = 1.0 / grid.h() - grid.g() / (sf.c * sf.c);

    const Eigen::MatrixXd A0 = assemble_A0(grid, sf);
    const Field sq = grid.weights().cwiseSqrt();
    Eigen::MatrixXd S = sq.asDiagonal() * A0 * sq.cwiseInverse().asDiagonal();
    rep.a0_asymmetry = (S - S.transpose()).cwiseAbs().maxCoeff() / S.cwiseAbs().maxCoeff();
    S = 0.5 * (S + S.transpose());
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    symmetric_eigen(S, values, vectors);
    rep.a0_eigenvalues = values;

    const Field u = sq.cwiseProduct(sf.psi_ex).normalized();
    Eigen::Index kidx = 0;
    (vectors.transpose() * u).cwiseAbs().maxCoeff(&kidx);
    rep.kernel_eigenvalue = values[kidx];
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (i != kidx && values[i] < 0.0) ++rep.n_minus;

    rep.kernel_residual = qnorm(grid, A0 * sf.psi_ex) / qnorm(grid, sf.psi_ex);
    {
        // Translation mode w' of the linearized wave equation (not of A0).
        const double beta = sf.lambda_p / grid.h();
        const Field& w = sf.w;
        const Field& v = sf.wp;
        const Field Nv = grid.N() * v;
        const Field Jv = Nv - beta * (v + v.cwiseProduct(sf.b_tilde) + w.cwiseProduct(Nv) + grid.N() * w.cwiseProduct(v));
        rep.translation_residual = qnorm(grid, Jv) / qnorm(grid, v);
    }

    Eigen::VectorXd absval = values.cwiseAbs();
    std::sort(absval.data(), absval.data() + absval.size());
    rep.smallest_singular[0] = absval[0];
    rep.smallest_singular[1] = absval.size() > 1 ? absval[1] : 0.0;

    const Field V = sf.potential();
    const double far = -grid.g() / (sf.c * sf.c);
    rep.edge_potential_gap = std::max(std::abs(V[0] - far), std::abs(V[V.size() - 1] - far));

    rep.spectra.resize(opts.lambdas.size());
    parallel_for(static_cast<int>(opts.lambdas.size()), opts.workers, [&](int i) {
        LambdaSpectrum& ls = rep.spectra[i];
        ls.lambda = opts.lambdas[i];
        try {
            const LambdaOperator op = assemble_A_lambda_fast(grid, sf, ls.lambda);
            ls.M_b = norm2_estimate(op.A - grid.N(), opts.power_iterations);
            const DenseLU lu(op.A);
            ls.det_sign = lu.det_sign();
            ls.eigenvalues = general_eigenvalues(op.A);
            std::sort(ls.eigenvalues.begin(), ls.eigenvalues.end(),
                      [](auto a, auto b) { return a.real() < b.real(); });
            ls.min_real = ls.eigenvalues.empty() ? 0.0 : ls.eigenvalues.front().real();
            for (const auto& z : ls.eigenvalues)
                if (z.real() < 0.0 && z.real() > -2.0 * ls.M_b && std::abs(z.imag()) < 2.0 * ls.M_b) ++ls.n_omega;
        } catch (const std::exception& e) {
            ls.failed = true;
            ls.message = e.what();
        }
    });
    for (const LambdaSpectrum& ls : rep.spectra)
        if (ls.failed) rep.failures.push_back("lambda " + std::to_string(ls.lambda) + ": " + ls.message);
    return rep;
}

std::vector<double> default_k_lambdas(double c, double h, int count) {
    std::vector<double> out;
    for (int j = 0; j < count; ++j) out.push_back(0.1 * c / h * std::ldexp(1.0, -j));
    return out;
}

MovingKernel track_k_lambda(const OperatorGrid& grid, const SurfaceFields& sf, double dE_dc,
                            std::vector<double> lambdas) {
    if (lambdas.empty()) lambdas = default_k_lambdas(sf.c, grid.h());
    if (lambdas.size() < 3) throw InsufficientData("track_k_lambda: need at least three lambdas");
    std::sort(lambdas.begin(), lambdas.end());

    MovingKernel mk;
    mk.dE_dc = dE_dc;
    mk.psi_ex_norm2 = qdot(grid, sf.psi_ex, sf.psi_ex);
    mk.rhs = -dE_dc / sf.c / mk.psi_ex_norm2;

    Field seed = sf.psi_ex;
    for (double lam : lambdas) {
        const LambdaOperator op = assemble_A_lambda_fast(grid, sf, lam);
        const DenseLU lu(op.A);
        if (lu.singular()) throw AssemblyError("track_k_lambda: A_lambda is singular");
        const NearZero nz = real_mode_near_zero(grid, lu, op.A, seed, spectral_radius_bound(op.A), 6);
        if (nz.overlap < 0.0 && mk.samples.size() >= 3) {
            // The tracked eigenvalue has met another one and left the real axis.
            mk.complex_from = lam;
            break;
        }
        if (nz.overlap < 0.5 || nz.runner_up > 0.8 * nz.overlap) {
            std::ostringstream os;
            os << "track_k_lambda: ambiguous pairing at lambda " << lam << " (overlap " << nz.overlap
               << ", runner-up " << nz.runner_up << ")";
            throw TrackingError(os.str());
        }
        mk.samples.push_back({lam, nz.value, nz.overlap});
        seed = nz.vector;
    }

    // Linear-in-lambda Richardson on g = k / lambda^2 from the three smallest
    // samples, assumed to be in ratio 1 : 2 : 4.
    auto g = [&](int i) { return mk.samples[i].k / (mk.samples[i].lambda * mk.samples[i].lambda); };
    const double r1a = 2.0 * g(1) - g(2);
    const double r1b = 2.0 * g(0) - g(1);
    mk.extrapolated = (4.0 * r1b - r1a) / 3.0;
    mk.error_bar = std::abs(mk.extrapolated - r1b);
    mk.k_over_lambda_min = mk.samples[0].k / mk.samples[0].lambda;
    return mk;
}

std::optional<GrowingMode> find_growing_mode(const OperatorGrid& grid, const SurfaceFields& sf,
                                             const GrowthSearchOptions& opts) {
    if (!(opts.lambda_min > 0.0) || !(opts.lambda_max > opts.lambda_min) || opts.samples < 2)
        throw ConfigError("find_growing_mode: bad lambda range");
    const double scale = sf.c / grid.h();

    auto det_sign = [&](double lam) {
        const LambdaOperator op = assemble_A_lambda_fast(grid, sf, lam);
        const DenseLU lu(op.A);
        return lu.singular() ? 0 : lu.det_sign();
    };

    // Log grid, refined by inserting midpoints until a parity change shows up.
    std::vector<double> t;
    for (int i = 0; i < opts.samples; ++i)
        t.push_back(std::log(opts.lambda_min) +
                    (std::log(opts.lambda_max) - std::log(opts.lambda_min)) * i / (opts.samples - 1));
    std::vector<int> sign(t.size());
    parallel_for(static_cast<int>(t.size()), opts.workers, [&](int i) { sign[i] = det_sign(scale * std::exp(t[i])); });

    auto brackets = [&] {
        std::vector<int> out;
        for (size_t i = 0; i + 1 < t.size(); ++i)
            if (sign[i] * sign[i + 1] <= 0) out.push_back(static_cast<int>(i));
        return out;
    };
    std::vector<int> br = brackets();
    for (int r = 0; br.empty() && r < opts.refinements; ++r) {
        std::vector<double> mid(t.size() - 1);
        std::vector<int> ms(mid.size());
        for (size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (t[i] + t[i + 1]);
        parallel_for(static_cast<int>(mid.size()), opts.workers, [&](int i) { ms[i] = det_sign(scale * std::exp(mid[i])); });
        std::vector<double> t2;
        std::vector<int> s2;
        for (size_t i = 0; i < t.size(); ++i) {
            t2.push_back(t[i]);
            s2.push_back(sign[i]);
            if (i < mid.size()) {
                t2.push_back(mid[i]);
                s2.push_back(ms[i]);
            }
        }
        t = std::move(t2);
        sign = std::move(s2);
        br = brackets();
    }
    if (br.empty()) return std::nullopt;

    // Illinois on the real eigenvalue nearest 0, in log lambda.
    struct Probe {
        double k;
        int det;
    };
    Field seed = sf.psi_ex;
    auto probe = [&](double tt) {
        const LambdaOperator op = assemble_A_lambda_fast(grid, sf, scale * std::exp(tt));
        const DenseLU lu(op.A);
        if (lu.singular()) return Probe{0.0, 0};
        const NearZero nz = smallest_real_mode(lu, op.A, seed, spectral_radius_bound(op.A));
        seed = nz.vector;
        return Probe{nz.value, lu.det_sign()};
    };

    std::vector<double> crossings;
    for (int b : br) {
        double ta = t[b], tb = t[b + 1];
        Probe pa = probe(ta), pb = probe(tb);
        const bool on_k = pa.k * pb.k < 0.0;
        int side = 0;
        bool done = false;
        for (int it = 0; it < opts.max_bisections; ++it) {
            if (pa.det == 0 || pb.det == 0 || pa.k == 0.0 || pb.k == 0.0) {
                done = true;
                break;
            }
            double tm;
            if (on_k) {
                tm = tb - pb.k * (tb - ta) / (pb.k - pa.k);
                if (!(tm > ta && tm < tb)) tm = 0.5 * (ta + tb);
            } else {
                tm = 0.5 * (ta + tb);
            }
            const Probe pm = probe(tm);
            const bool left = on_k ? (pm.k * pa.k < 0.0) : (pm.det != pa.det);
            if (left) {
                tb = tm;
                pb = pm;
                if (side == -1 && on_k) pa.k *= 0.5;
                side = -1;
            } else {
                ta = tm;
                pa = pm;
                if (side == 1 && on_k) pb.k *= 0.5;
                side = 1;
            }
            if (tb - ta <= opts.rel_tol || pm.k == 0.0) {
                done = true;
                break;
            }
        }
        if (!done) {
            std::ostringstream os;
            os << "find_growing_mode: bracket [" << scale * std::exp(ta) << ", " << scale * std::exp(tb)
               << "] did not shrink below tolerance";
            throw BracketingError(os.str());
        }
        // Report the end with the smaller residual eigenvalue.
        const Probe fa = probe(ta), fb = probe(tb);
        crossings.push_back(scale * std::exp(std::abs(fa.k) <= std::abs(fb.k) ? ta : tb));
    }

    GrowingMode gm;
    gm.crossings = crossings;
    gm.lambda_star = *std::max_element(crossings.begin(), crossings.end());
    const LambdaOperator op = assemble_A_lambda_fast(grid, sf, gm.lambda_star);
    const DenseLU lu(op.A);
    if (lu.singular()) throw BracketingError("find_growing_mode: A is exactly singular at the crossing");
    const NearZero nz = smallest_real_mode(lu, op.A, seed, spectral_radius_bound(op.A));
    gm.xi = grid.xi();
    gm.f = nz.vector / qnorm(grid, nz.vector);
    if (gm.f[grid.center()] < 0.0) gm.f = -gm.f;
    gm.eta = op.C_tilde * gm.f;
    gm.P_trace = -sf.P_ey.cwiseProduct(gm.eta);
    gm.physical_x = sf.x;
    const Field Af = op.A * gm.f;
    gm.kernel_residual = qnorm(grid, Af);
    gm.equation_residual = qnorm(grid, Af.cwiseQuotient(sf.b));
    return gm;
}

KdvScalingResult kdv_scaling_check(double rho, double L, int M) {
    GridSpec gs;
    gs.L = L;
    gs.M = M;
    const Spectral sp(gs, Dealias::none);
    const double lambda_p = std::exp(-3.0 * rho * rho);
    const OperatorGrid grid = OperatorGrid::periodic(gs);
    const GridWave wave = solve_on_grid(grid, kdv_predictor(sp, 1.0 / std::sqrt(lambda_p)), lambda_p, 1e-12);
    const SurfaceFields sf = surface_fields(grid, wave);
    Eigen::MatrixXd A0 = assemble_A0(grid, sf);
    A0 = 0.5 * (A0 + A0.transpose()).eval();
    const Eigen::VectorXd ev = symmetric_eigenvalues(A0);
    KdvScalingResult r;
    r.rho = rho;
    r.eigenvalues = ev.head<3>();
    r.expected = rho * rho * Eigen::Vector3d(-15.0 / 4.0, 0.0, 9.0 / 4.0);
    r.max_relative_error = std::max(std::abs(r.eigenvalues[0] / r.expected[0] - 1.0),
                                    std::abs(r.eigenvalues[2] / r.expected[2] - 1.0));
    return r;
}

TransitionReport transition_scan(const BranchRecord& branch, const TransitionOptions& opts) {
    const auto em = branch.first_energy_max();
    const auto cm = branch.first_speed_max();
    if (!em || !cm) throw InsufficientData("transition_scan: branch lacks an energy or speed maximum");
    TransitionReport rep;
    rep.energy_max_alpha = em->alpha;
    rep.energy_max_uncertainty = em->alpha_uncertainty;
    rep.speed_max_alpha = cm->alpha;

    std::vector<WaveState> waves;
    if (opts.alphas.empty()) {
        for (const BranchPoint& p : branch.points)
            if (p.obs.alpha > em->alpha && p.obs.alpha < cm->alpha) waves.push_back(p.wave);
    } else {
        for (double a : opts.alphas) {
            const BranchPoint& p = branch.points[branch.nearest_alpha(a)];
            const Spectral sp(p.wave.grid, branch.dealias);
            NewtonOptions o = branch.tolerances;
            o.check_resolution = false;
            waves.push_back(newton_solve_amplitude(sp, p.wave.w, p.wave.lambda_p, a * p.wave.grid.h, o));
        }
    }

    for (const WaveState& ws : waves) {
        const Spectral sp(ws.grid, branch.dealias);
        const Observables ob = observables(sp, ws);
        const PreparedWave pw = prepare_stability_wave(ws, branch.dealias, opts.grid);
        const SurfaceFields sf = surface_fields(pw.grid, pw.wave);
        TransitionRow row;
        row.alpha = ob.alpha;
        row.omega = ob.omega;
        row.omega_alt = ob.omega_alt;
        row.grid_size = pw.grid.size();
        if (auto gm = find_growing_mode(pw.grid, sf, opts.search)) row.lambda_star = gm->lambda_star;
        rep.rows.push_back(row);
    }
    std::sort(rep.rows.begin(), rep.rows.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });

    std::vector<double> xs, ys;
    for (const TransitionRow& r : rep.rows)
        if (r.lambda_star) {
            xs.push_back(r.alpha);
            ys.push_back(*r.lambda_star);
        }
    rep.monotone = !ys.empty() && std::is_sorted(ys.begin(), ys.end());
    if (!ys.empty())
        rep.min_max_ratio = *std::min_element(ys.begin(), ys.end()) / *std::max_element(ys.begin(), ys.end());
    // lambda* vanishes linearly where dE/dc does; fit a line and take its root.
    auto root = [&](size_t count) {
        const size_t n = std::min(count, xs.size());
        double mx = 0, my = 0;
        for (size_t i = 0; i < n; ++i) {
            mx += xs[i] / n;
            my += ys[i] / n;
        }
        double sxy = 0, sxx = 0;
        for (size_t i = 0; i < n; ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        return mx - my * sxx / sxy;
    };
    if (xs.size() >= 2) {
        rep.zero_alpha = root(3);
        rep.zero_alpha_error = std::abs(rep.zero_alpha - root(2));
    }
    return rep;
}

namespace {

struct AppendixTerms {
    Field q;     // u_e / psi_ey + P_ey eta_e / psi_ey^2
    Field lhs;   // A0 d_c psibar
    Field b;
    Field eta;
    Field u_over_psi;
};

AppendixTerms appendix_terms(const BranchRecord& branch, int index, const SensitivityTraces& tr) {
    const WaveState& ws = branch.points.at(index).wave;
    const Spectral sp(ws.grid, branch.dealias);
    const SurfaceFields sf = surface_fields(sp, ws);
    AppendixTerms t;
    t.b = sf.b;
    t.eta = ws.w;
    t.u_over_psi = (1.0 - sf.c / sf.psi_ey.array()).matrix();
    t.q = t.u_over_psi + sf.P_ey.cwiseProduct(ws.w).cwiseQuotient(sf.psi_ey.cwiseProduct(sf.psi_ey));
    t.lhs = sp.apply_N(tr.d_c_psibar) + sf.potential().cwiseProduct(tr.d_c_psibar);
    return t;
}

}  // namespace

double appendix_identity_residual(const BranchRecord& branch, int index, const SensitivityTraces& tr) {
    const AppendixTerms t = appendix_terms(branch, index, tr);
    const Field rhs = -t.b.cwiseProduct(t.q);
    return (t.lhs - rhs).norm() / rhs.norm();
}

double appendix_identity_check(const BranchRecord& branch, int index, std::optional<double> delta_c) {
    return appendix_identity_residual(branch, index, dc_surface_traces(branch, index, delta_c));
}

DPdcCheck dPdc_formula_check(const BranchRecord& branch, int index, std::optional<double> delta_c) {
    const SensitivityTraces tr = dc_surface_traces(branch, index, delta_c);
    const AppendixTerms t = appendix_terms(branch, index, tr);
    const Spectral sp(branch.points.at(index).wave.grid, branch.dealias);
    auto dx_inner = [&](const Field& a, const Field& b) { return sp.integrate(a.cwiseProduct(b).cwiseProduct(t.b)); };
    DPdcCheck out;
    out.formula = -dx_inner(t.eta, t.u_over_psi + t.q) - dx_inner(tr.d_c_psibar, t.q);
    out.finite_difference = tr.dP_dc_fd;
    out.relative_error = std::abs(out.formula - out.finite_difference) / std::abs(out.finite_difference);
    return out;
}

}  // namespace wavestab
