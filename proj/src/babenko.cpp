#include "wavestab/babenko.hpp"

#include <cmath>
#include <sstream>

#include "wavestab/errors.hpp"
#include "wavestab/linalg.hpp"

namespace wavestab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Floor on the preconditioner's local coefficient 1 - 2 beta w, which tends to
// (q_c / c)^2 at the crest of steep waves.
constexpr double kCoefficientFloor = 0.02;

} // namespace

double speed_from_lambda(const GridSpec& grid, double lambda_p) {
    return std::sqrt(grid.g * grid.h / lambda_p);
}

double lambda_from_speed(const GridSpec& grid, double c) { return grid.g * grid.h / (c * c); }

double functional_J(const Spectral& sp, const Field& w, double lambda_p) {
    const double beta = lambda_p / sp.grid().h;
    const Field u = sp.dealias(w);
    const Field Nw = sp.apply_N(w);
    const Field Nu = sp.apply_N(u);
    const Field u2 = u.cwiseProduct(u);
    return 0.5 * (sp.inner(w, Nw) - beta * sp.inner(w, w) - beta * sp.inner(u2, Nu));
}

namespace {

// F(u N u) + 1/2 F N(u^2) with u = F w.
Field nonlinear_part(const Spectral& sp, const Field& w) {
    const Field u = sp.dealias(w);
    const Field Nu = sp.apply_N(u);
    return sp.dealias(u.cwiseProduct(Nu) + 0.5 * sp.apply_N(u.cwiseProduct(u)));
}

} // namespace

Field babenko_residual(const Spectral& sp, const Field& w, double lambda_p) {
    const double beta = lambda_p / sp.grid().h;
    return sp.apply_N(w) - beta * (w + nonlinear_part(sp, w));
}

Field babenko_dlambda(const Spectral& sp, const Field& w) {
    return -(w + nonlinear_part(sp, w)) / sp.grid().h;
}

Field babenko_jacobian_apply(const Spectral& sp, const Field& w, double lambda_p, const Field& v) {
    const double beta = lambda_p / sp.grid().h;
    const Field u = sp.dealias(w);
    const Field z = sp.dealias(v);
    const Field Nu = sp.apply_N(u);
    const Field Nz = sp.apply_N(z);
    const Field inner = z.cwiseProduct(Nu) + u.cwiseProduct(Nz) + sp.apply_N(u.cwiseProduct(z));
    return sp.apply_N(v) - beta * (v + sp.dealias(inner));
}

ResolutionReport resolution_report(const Spectral& sp, const Field& w, const NewtonOptions& opts) {
    ResolutionReport r;
    const double crest = std::abs(w[sp.grid().center()]);
    r.tail_ratio = crest > 0.0 ? std::abs(w[0]) / crest : 0.0;
    r.spectral_ratio = crest > 0.0 ? sp.tail_spectrum_ratio(w) : 0.0;
    r.tail_ok = r.tail_ratio <= opts.tail_tol;
    r.spectral_ok = r.spectral_ratio <= opts.spectral_tol;
    return r;
}

BorderedResult bordered_newton(const Spectral& sp, Field w, double lambda_p, const BorderRow& row,
                               const NewtonOptions& opts) {
    const int M = sp.size();
    const int c0 = sp.grid().center();
    const double h = sp.grid().h;
    BorderedResult out;
    double first = -1.0;
    for (int it = 0;; ++it) {
        const Field R = babenko_residual(sp, w, lambda_p);
        const double s = row.ga * w[c0] + row.gl * lambda_p - row.rhs;
        const double res = std::max(R.cwiseAbs().maxCoeff(), std::abs(s));
        out.w = w;
        out.lambda_p = lambda_p;
        out.residual_norm = res;
        out.iterations = it;
        if (!std::isfinite(res)) return out;
        if (res <= opts.tol) {
            out.converged = true;
            return out;
        }
        if (first < 0.0) first = res;
        if (it >= opts.max_iterations || res > 1e6 * std::max(first, 1e-8)) return out;

        const double beta = lambda_p / h;
        const Field Rl = babenko_dlambda(sp, w);
        const Field q = (1.0 - 2.0 * beta * sp.dealias(w).array()).max(kCoefficientFloor).matrix();
        // P = diag(q) (N - beta); inverse is a Fourier division after scaling.
        const Eigen::VectorXd shifted = (sp.symbol_N().array() - beta).matrix();
        auto Pinv = [&](const Field& x) {
            Spectrum F = sp.forward(x.cwiseQuotient(q));
            for (size_t m = 0; m < F.size(); ++m) F[m] /= shifted[m];
            return sp.inverse(F);
        };
        const Field y2 = Pinv(Rl);
        const double denom = row.gl - row.ga * y2[c0];
        const bool eliminate = std::abs(denom) > 1e-12 * (std::abs(row.gl) + std::abs(row.ga));

        LinearMap A = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd y(M + 1);
            y.head(M) = babenko_jacobian_apply(sp, w, lambda_p, x.head(M)) + x[M] * Rl;
            y[M] = row.ga * x[c0] + row.gl * x[M];
            return y;
        };
        LinearMap K = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd y(M + 1);
            const Field y1 = Pinv(x.head(M));
            if (eliminate) {
                const double dl = (x[M] - row.ga * y1[c0]) / denom;
                y.head(M) = y1 - dl * y2;
                y[M] = dl;
            } else {
                y.head(M) = y1;
                y[M] = x[M];
            }
            return y;
        };
        Eigen::VectorXd rhs(M + 1);
        rhs.head(M) = -R;
        rhs[M] = -s;
        GmresOptions go;
        go.rel_tol = opts.gmres_tol;
        // Below this the update is lost in the rounding of the residual itself.
        go.abs_tol = 0.05 * opts.tol;
        const GmresResult sol = gmres(A, rhs, K, go);
        w = symmetrize(w + sol.x.head(M));
        lambda_p += sol.x[M];
    }
}

namespace {

void finish_checks(const Spectral& sp, const BorderedResult& r, const NewtonOptions& opts,
                   const char* what) {
    if (!r.converged) {
        std::ostringstream os;
        os << what << ": Newton did not converge after " << r.iterations
           << " iterations, last residual " << r.residual_norm;
        throw ConvergenceError(os.str(), r.residual_norm);
    }
    if (!opts.check_resolution) return;
    const ResolutionReport rep = resolution_report(sp, r.w, opts);
    if (!rep.tail_ok || !rep.spectral_ok) {
        std::ostringstream os;
        os << what << ": under-resolved wave (tail ratio " << rep.tail_ratio << ", limit "
           << opts.tail_tol << "; spectral ratio " << rep.spectral_ratio << ", limit "
           << opts.spectral_tol << ")";
        throw ResolutionError(os.str());
    }
}

WaveState to_state(const Spectral& sp, const BorderedResult& r) {
    WaveState s;
    s.grid = sp.grid();
    s.w = r.w;
    s.lambda_p = r.lambda_p;
    s.c = speed_from_lambda(sp.grid(), r.lambda_p);
    s.residual_norm = r.residual_norm;
    s.newton_iterations = r.iterations;
    return s;
}

} // namespace

WaveState newton_solve(const Spectral& sp, const Field& w0, double lambda_p,
                       const NewtonOptions& opts) {
    const BorderRow row{0.0, 1.0, lambda_p};
    const BorderedResult r = bordered_newton(sp, symmetrize(w0), lambda_p, row, opts);
    finish_checks(sp, r, opts, "newton_solve");
    return to_state(sp, r);
}

WaveState newton_solve_amplitude(const Spectral& sp, const Field& w0, double lambda0,
                                 double amplitude, const NewtonOptions& opts) {
    const BorderRow row{1.0, 0.0, amplitude};
    const BorderedResult r = bordered_newton(sp, symmetrize(w0), lambda0, row, opts);
    finish_checks(sp, r, opts, "newton_solve_amplitude");
    return to_state(sp, r);
}

Field kdv_predictor(const Spectral& sp, double froude) {
    const double h = sp.grid().h;
    const double a = h * (froude * froude - 1.0);
    const double beta = std::sqrt(3.0 * a / (4.0 * h * h * h));
    Field w(sp.size());
    for (int j = 0; j < sp.size(); ++j) {
        const double s = 1.0 / std::cosh(beta * sp.nodes()[j]);
        w[j] = a * s * s;
    }
    return w;
}

Observables observables(const Spectral& sp, const WaveState& wave) {
    const GridSpec& gr = sp.grid();
    Observables o;
    o.c = speed_from_lambda(gr, wave.lambda_p);
    o.F = o.c / std::sqrt(gr.g * gr.h);
    const Field Nw = sp.apply_N(wave.w);
    const Field wp = sp.apply_ddxi(wave.w);
    const int c0 = gr.center();
    const double b0 = 1.0 + Nw[c0];
    const double W0 = std::hypot(b0, wp[c0]);
    o.q_c = o.c / W0;
    const double ratio2 = 1.0 / (W0 * W0);
    o.omega = 1.0 - ratio2;
    o.omega_alt = 1.0 - o.q_c * o.q_c / (gr.g * gr.h);
    o.mu = 6.0 * gr.g * gr.h * o.c / (kPi * o.q_c * o.q_c * o.q_c);
    o.alpha = wave.w[c0] / gr.h;
    const double wNw = sp.inner(wave.w, Nw);
    o.kinetic = 0.5 * o.c * o.c * wNw;
    const Field b = (1.0 + Nw.array()).matrix();
    o.potential = 0.5 * gr.g * sp.integrate(wave.w.cwiseProduct(wave.w).cwiseProduct(b));
    o.E = o.kinetic + o.potential;
    o.P = -o.c * wNw;
    o.delta0 = 1.0 / gr.h - gr.g / (o.c * o.c);
    o.near_singular = ratio2 < 1e-3;
    return o;
}

} // namespace wavestab
