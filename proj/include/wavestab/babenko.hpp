#pragma once

#include <optional>
#include <string>

#include "wavestab/spectral.hpp"

namespace wavestab {

// A converged solitary wave in conformal variables.
struct WaveState {
    GridSpec grid;
    Field w;                 // surface elevation y1(xi, 0)
    double lambda_p = 1.0;   // 1 / F^2
    double c = 1.0;          // sqrt(g h / lambda_p)
    double residual_norm = 0.0;
    int newton_iterations = 0;

    double amplitude() const { return w.size() ? w[grid.center()] : 0.0; }
};

double speed_from_lambda(const GridSpec& grid, double lambda_p);
double lambda_from_speed(const GridSpec& grid, double c);

struct Observables {
    double c = 0.0;
    double F = 0.0;
    double q_c = 0.0;
    double omega = 0.0;      // 1 - (q_c / c)^2
    double omega_alt = 0.0;  // 1 - q_c^2 / (g h)
    double mu = 0.0;         // Nekrasov parameter 6ghc / (pi q_c^3)
    double alpha = 0.0;      // w(0) / h
    double E = 0.0;
    double P = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double delta0 = 0.0;
    bool near_singular = false;
};

// Variational functional and its derivatives. With dealiasing on, the cubic
// term is evaluated on the 2/3-truncated field, so the residual and Jacobian
// below are the exact gradient and Hessian of the discrete functional.
double functional_J(const Spectral& sp, const Field& w, double lambda_p);
Field babenko_residual(const Spectral& sp, const Field& w, double lambda_p);
Field babenko_jacobian_apply(const Spectral& sp, const Field& w, double lambda_p, const Field& v);
// Partial derivative of the residual with respect to lambda_p.
Field babenko_dlambda(const Spectral& sp, const Field& w);

struct NewtonOptions {
    double tol = 1e-12;
    int max_iterations = 30;
    double tail_tol = 1e-10;
    double spectral_tol = 1e-12;
    bool check_resolution = true;
    double gmres_tol = 1e-10;
};

// Linear side condition g_a * w(0) + g_l * lambda_p = rhs closing the bordered system.
struct BorderRow {
    double ga = 0.0;
    double gl = 1.0;
    double rhs = 0.0;
};

struct BorderedResult {
    Field w;
    double lambda_p = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Newton on R(w, lambda_p) = 0 plus one linear side condition, with GMRES and a
// variable-coefficient Fourier preconditioner. Evenness is enforced after every
// update. Never throws on non-convergence; see `converged`.
BorderedResult bordered_newton(const Spectral& sp, Field w, double lambda_p, const BorderRow& row,
                               const NewtonOptions& opts);

// Resolution diagnostics of a field on its grid.
struct ResolutionReport {
    double tail_ratio = 0.0;      // max(|w(-L/2)|) / w(0)
    double spectral_ratio = 0.0;  // Spectral::tail_spectrum_ratio
    bool tail_ok = true;
    bool spectral_ok = true;
};
ResolutionReport resolution_report(const Spectral& sp, const Field& w, const NewtonOptions& opts);

// Newton solve at fixed lambda_p. Throws ConvergenceError or ResolutionError.
WaveState newton_solve(const Spectral& sp, const Field& w0, double lambda_p,
                       const NewtonOptions& opts = {});

// Newton solve at fixed crest height w(0) = amplitude with lambda_p free.
WaveState newton_solve_amplitude(const Spectral& sp, const Field& w0, double lambda0,
                                 double amplitude, const NewtonOptions& opts = {});

// First-order KdV profile a sech^2(beta xi) with a = h (F^2 - 1).
Field kdv_predictor(const Spectral& sp, double froude);

Observables observables(const Spectral& sp, const WaveState& wave);

} // namespace wavestab
