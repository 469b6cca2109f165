#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavestab/branch.hpp"
#include "wavestab/opgrid.hpp"
#include "wavestab/surface.hpp"

namespace wavestab {

// A0 = N + diag(b P_ey / psi_ey^2).
Eigen::MatrixXd assemble_A0(const OperatorGrid& grid, const SurfaceFields& sf);

// Every intermediate operator at one lambda > 0.
struct OperatorBundle {
    double lambda = 0.0;
    Eigen::MatrixXd D_tilde;   // (1/b) d/dxi (psi_ey .)
    Eigen::MatrixXd E_plus;    // lambda (lambda + D_tilde)^{-1}
    Eigen::MatrixXd E_minus;   // lambda (lambda - D_tilde)^{-1}
    Eigen::MatrixXd C_tilde;   // (1 - E_plus) diag(1 / psi_ey)
    Eigen::MatrixXd A_lambda;  // N + diag(b) C_tilde diag(P_ey) C_tilde
};

// Throws AssemblyError when lambda <= 0 or a shifted system is singular.
OperatorBundle assemble_A_lambda(const OperatorGrid& grid, const SurfaceFields& sf, double lambda);

// C_tilde and A_lambda only, through the factorization
// C_tilde = diag(1/psi_ey) (lambda diag(b/psi_ey) + D)^{-1} D.
struct LambdaOperator {
    double lambda = 0.0;
    Eigen::MatrixXd C_tilde;
    Eigen::MatrixXd A;
};
LambdaOperator assemble_A_lambda_fast(const OperatorGrid& grid, const SurfaceFields& sf, double lambda);

// Largest singular value of W^{1/2} T W^{-1/2} for the weight W = b psi_ey q.
double weighted_norm(const OperatorGrid& grid, const SurfaceFields& sf, const Eigen::MatrixXd& T);
// max |<D u, v>_W + <u, D v>_W| over unit u, v, i.e. the weighted norm of
// the symmetric part of D_tilde.
double weighted_antisymmetry_defect(const OperatorGrid& grid, const SurfaceFields& sf,
                                    const Eigen::MatrixXd& D_tilde);

struct LambdaSpectrum {
    double lambda = 0.0;
    std::vector<std::complex<double>> eigenvalues;  // sorted by real part
    int n_omega = 0;    // eigenvalues with Re < 0 inside the box
    double M_b = 0.0;   // ||A_lambda - N||_2 estimate; box is Re > -2 M_b, |Im| < 2 M_b
    int det_sign = 0;
    double min_real = 0.0;
    bool failed = false;
    std::string message;
};

struct KSample {
    double lambda = 0.0;
    double k = 0.0;
    double overlap = 0.0;  // weighted overlap with the previous sample's vector
};

struct MovingKernel {
    std::vector<KSample> samples;  // ascending lambda
    // First lambda at which k_lambda had joined a complex pair; tracking stops there.
    std::optional<double> complex_from;
    double extrapolated = 0.0;     // k_lambda / lambda^2 as lambda -> 0
    double error_bar = 0.0;
    double k_over_lambda_min = 0.0;  // k / lambda at the smallest lambda
    double dE_dc = 0.0;
    double psi_ex_norm2 = 0.0;
    double rhs = 0.0;  // -(1/c) dE/dc / ||psi_ex||^2
    double relative_error() const { return std::abs(extrapolated - rhs) / std::abs(rhs); }
};

struct GrowingMode {
    double lambda_star = 0.0;
    Field xi;
    Field f;
    Field eta;      // C_tilde f
    Field P_trace;  // -P_ey eta
    Field physical_x;
    double kernel_residual = 0.0;    // ||A f|| / ||f||
    double equation_residual = 0.0;  // ||(1/b) N f + C_tilde P_ey C_tilde f|| / ||f||
    std::vector<double> crossings;   // every bracketed zero crossing found
};

struct StabilityReport {
    // Grid provenance.
    std::string grid_kind;
    int grid_size = 0;
    double ell = 0.0;
    double spectral_ratio = 0.0;
    bool resolved = true;
    double alpha = 0.0;
    double c = 0.0;

    Eigen::VectorXd a0_eigenvalues;  // ascending
    int n_minus = 0;                 // negative eigenvalues other than the kernel mode
    double kernel_eigenvalue = 0.0;  // eigenvalue whose vector best matches psi_ex
    double kernel_residual = 0.0;    // ||A0 psi_ex|| / ||psi_ex||
    double translation_residual = 0.0;  // ||J w'|| / ||w'||, J the linearized wave equation
    double a0_asymmetry = 0.0;
    double delta0 = 0.0;
    double smallest_singular[2] = {0.0, 0.0};
    double edge_potential_gap = 0.0;  // |b P_ey / psi_ey^2 + g / c^2| at the far end

    std::vector<LambdaSpectrum> spectra;
    std::optional<MovingKernel> moving_kernel;
    std::optional<GrowingMode> growing_mode;
    bool growth_search_done = false;
    std::vector<std::string> failures;
};

struct SpectrumOptions {
    std::vector<double> lambdas;  // absolute values; empty skips the per-lambda spectra
    int power_iterations = 40;
    int workers = 1;
};

// A0 spectrum and kernel diagnostics, plus the full spectrum of A_lambda on a
// lambda list. Eigensolver failures are flagged, not thrown.
StabilityReport spectrum_report(const OperatorGrid& grid, const SurfaceFields& sf,
                                const SpectrumOptions& opts = {});

// Default lambda_j = 0.1 (c/h) 2^{-j}, j = 0..6.
std::vector<double> default_k_lambdas(double c, double h, int count = 7);

// Real eigenvalue of A_lambda continued from the kernel of A0 (seed psi_ex),
// from the smallest lambda upward. Throws TrackingError on ambiguous pairing.
MovingKernel track_k_lambda(const OperatorGrid& grid, const SurfaceFields& sf, double dE_dc,
                            std::vector<double> lambdas = {});

struct GrowthSearchOptions {
    double lambda_min = 1e-4;  // in units of c/h
    double lambda_max = 1.0;
    int samples = 14;
    int refinements = 1;       // sample-count doublings before declaring none
    int max_bisections = 60;
    double rel_tol = 1e-7;
    int workers = 1;
};

// Log scan of sign det A_lambda, which is the parity of the number of
// eigenvalues with Re < 0. Each parity change is bracketed and refined on the
// real eigenvalue nearest 0. Returns the mode at the largest crossing.
// Throws BracketingError when a bracket stagnates.
std::optional<GrowingMode> find_growing_mode(const OperatorGrid& grid, const SurfaceFields& sf,
                                             const GrowthSearchOptions& opts = {});

// Kernel eigenvalue of A0 on a small-amplitude wave with lambda_p = exp(-3 rho^2),
// for the KdV-scaling check: the three smallest eigenvalues of A0.
struct KdvScalingResult {
    double rho = 0.0;
    Eigen::Vector3d eigenvalues;
    Eigen::Vector3d expected;  // rho^2 {-15/4, 0, 9/4}
    double max_relative_error = 0.0;  // on the two nonzero eigenvalues
};
KdvScalingResult kdv_scaling_check(double rho, double L = 400.0, int M = 1024);

struct TransitionRow {
    double alpha = 0.0;
    double omega = 0.0;
    double omega_alt = 0.0;
    std::optional<double> lambda_star;
    int grid_size = 0;
};

struct TransitionReport {
    double energy_max_alpha = 0.0;
    double energy_max_uncertainty = 0.0;
    double speed_max_alpha = 0.0;
    std::vector<TransitionRow> rows;  // ascending alpha
    bool monotone = false;            // lambda* increasing with alpha over the found points
    double min_max_ratio = 0.0;
    double zero_alpha = 0.0;          // linear extrapolation of lambda*(alpha) to 0
    double zero_alpha_error = 0.0;
};

struct TransitionOptions {
    std::vector<double> alphas;  // empty: every branch point inside the window
    StabilityGridOptions grid;
    GrowthSearchOptions search;
};

// lambda*(alpha) across the window between the first energy and speed maxima.
// Waves at requested alphas are solved from the nearest branch point.
TransitionReport transition_scan(const BranchRecord& branch, const TransitionOptions& opts = {});

// Residual of A0 d_c psibar = -b (u_e / psi_ey + P_ey eta_e / psi_ey^2) on the
// branch's own periodic grid, relative to the right side.
double appendix_identity_residual(const BranchRecord& branch, int index, const SensitivityTraces& tr);
double appendix_identity_check(const BranchRecord& branch, int index, std::optional<double> delta_c = {});

struct DPdcCheck {
    double formula = 0.0;
    double finite_difference = 0.0;
    double relative_error = 0.0;
};
// -<eta_e, 2 u_e/psi_ey + P_ey eta_e/psi_ey^2> - <d_c psibar, u_e/psi_ey + P_ey eta_e/psi_ey^2>
// in the dx = b dxi measure, against the finite difference of P in c.
DPdcCheck dPdc_formula_check(const BranchRecord& branch, int index, std::optional<double> delta_c = {});

}  // namespace wavestab
