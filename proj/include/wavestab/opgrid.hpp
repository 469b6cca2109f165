#pragma once

#include <Eigen/Dense>

#include "wavestab/babenko.hpp"

namespace wavestab {

// Dense collocation grid for the stability operators.
//
// `periodic` is the uniform xi grid of a Spectral object. `line` covers the
// whole real line through xi = ell tan(s/2) with s uniform on (-pi, pi); the
// node at s = -pi (xi = infinity) is dropped, which imposes decay there. The
// mapped grid clusters nodes at the crest and, unlike a periodic box, keeps
// the slow far-field response of (lambda + D)^{-1} intact for small lambda.
class OperatorGrid {
public:
    enum class Kind { periodic, line };

    static OperatorGrid periodic(const GridSpec& grid);
    static OperatorGrid line(int M, double ell, double h, double g);

    Kind kind() const { return kind_; }
    int size() const { return static_cast<int>(xi_.size()); }
    // Number of underlying s-nodes (size() + 1 on the line grid).
    int base_size() const { return M_; }
    double h() const { return h_; }
    double g() const { return g_; }
    double ell() const { return ell_; }
    double period() const { return L_; }
    int center() const { return kind_ == Kind::periodic ? M_ / 2 : M_ / 2 - 1; }

    const Eigen::VectorXd& xi() const { return xi_; }
    // Quadrature weights for integrals in d xi.
    const Eigen::VectorXd& weights() const { return q_; }
    const Eigen::MatrixXd& N() const { return N_; }
    const Eigen::MatrixXd& D() const { return D_; }

    double inner(const Field& a, const Field& b) const { return (a.array() * b.array() * q_.array()).sum(); }
    double norm(const Field& f) const { return std::sqrt(inner(f, f)); }
    Field mirror(const Field& f) const;
    Field symmetrize(const Field& f) const { return 0.5 * (f + mirror(f)); }
    // Integral of f from xi = 0.
    Field integral_from_center(const Field& f) const;
    // Integral of f from the left end (xi = -infinity on the line grid, the
    // box edge on the periodic one).
    Field integral_from_left(const Field& f) const;
    // C f as the primitive of N f from the left end.
    Field apply_C(const Field& f) const { return integral_from_left(N_ * f); }
    // Top-band to peak ratio of the coefficients of f in the grid's own
    // Fourier variable (xi on the periodic grid, s on the line grid).
    double spectral_ratio(const Field& f) const;

private:
    Kind kind_ = Kind::periodic;
    int M_ = 0;
    double h_ = 1.0, g_ = 1.0, ell_ = 0.0, L_ = 0.0;
    Eigen::VectorXd xi_, q_, xprime_;
    Eigen::MatrixXd N_, D_;
};

// A wave solved by collocation on an OperatorGrid (no dealiasing).
struct GridWave {
    Field w;
    double lambda_p = 1.0;
    double c = 1.0;
    double residual_norm = 0.0;
    int iterations = 0;
    double amplitude = 0.0;
    double spectral_ratio = 0.0;
};

Field grid_residual(const OperatorGrid& grid, const Field& w, double lambda_p);

// Dense Newton at fixed lambda_p with evenness enforced. Throws ConvergenceError.
GridWave solve_on_grid(const OperatorGrid& grid, const Field& guess, double lambda_p, double tol = 1e-10,
                       int max_iterations = 30);

// Samples a periodic-box wave at the grid's nodes; zero outside the box.
Field transfer_wave(const Spectral& src, const Field& w, const OperatorGrid& grid);

struct StabilityGridOptions {
    OperatorGrid::Kind kind = OperatorGrid::Kind::line;
    double ell = 2.0;        // line map scale, in units of h
    double period = 0.0;     // periodic grid: 0 keeps the source period
    int M_min = 512;
    int M_max = 4096;
    double spectral_tol = 1e-9;
    double newton_tol = 1e-10;
};

struct PreparedWave {
    OperatorGrid grid;
    GridWave wave;
    bool resolved = true;  // spectral ratio met at some M <= M_max
};

// Transfers a branch wave to a stability grid, doubling M until the polished
// wave's spectral ratio meets the tolerance.
PreparedWave prepare_stability_wave(const WaveState& src, Dealias src_dealias,
                                    const StabilityGridOptions& opts = {});

}  // namespace wavestab
