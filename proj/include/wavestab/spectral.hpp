#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace wavestab {

using Field = Eigen::VectorXd;
using Spectrum = std::vector<std::complex<double>>;

// Periodic grid standing in for the real line. Nodes xi_j = -L/2 + j L/M.
struct GridSpec {
    double L = 120.0;
    int M = 1024;
    double h = 1.0;
    double g = 1.0;

    void validate() const;
    double dxi() const { return L / M; }
    double node(int j) const { return -0.5 * L + j * dxi(); }
    // Wavenumber of rfft bin m in 0..M/2.
    double wavenumber(int m) const;
    // Index of the node at xi = 0.
    int center() const { return M / 2; }
};

bool operator==(const GridSpec& a, const GridSpec& b);

enum class Dealias { none, two_thirds };

// n(k) = k / tanh(k h), continuous at k = 0.
double symbol_n(double k, double h);

// Fourier-multiplier toolbox on one grid. Copies share the FFTW plans.
// All members are const and safe to call from several threads.
class Spectral {
public:
    explicit Spectral(const GridSpec& grid, Dealias mode = Dealias::two_thirds);

    const GridSpec& grid() const { return grid_; }
    int size() const { return grid_.M; }
    Dealias dealias_mode() const { return mode_; }
    const Field& nodes() const { return nodes_; }
    // n(k_m) for m = 0..M/2.
    const Eigen::VectorXd& symbol_N() const { return n_; }
    std::complex<double> symbol_C(int m) const;

    Spectrum forward(const Field& f) const;
    Field inverse(const Spectrum& F) const;

    Field apply_N(const Field& f) const;
    Field apply_C(const Field& f) const;
    Field apply_ddxi(const Field& f) const;
    // C anchored so that the result vanishes at the left edge xi = -L/2.
    // This is the periodic stand-in for the primitive taken from -infinity.
    Field apply_C_edge(const Field& f) const;
    // Zero-mean antiderivative of a zero-mean field.
    Field antiderivative(const Field& f) const;

    // 2/3-rule truncation when dealiasing is on, identity otherwise.
    Field dealias(const Field& f) const;
    // Product of two fields with the configured dealiasing applied to both
    // factors and to the result.
    Field product(const Field& a, const Field& b) const;

    double integrate(const Field& f) const;
    double inner(const Field& a, const Field& b) const;
    double norm(const Field& f) const;

    // Trigonometric interpolant of f (given by its spectrum) at any xi.
    double evaluate(const Spectrum& F, double xi) const;
    // Spectral resampling to another grid with the same period.
    Field resample(const Field& f, const Spectral& target) const;
    // Samples the interpolant of f at the target's nodes; the periods may differ.
    Field interpolate(const Field& f, const Spectral& target) const;

    // Ratio of the largest coefficient magnitude in the top band below the
    // retained cutoff to the largest coefficient overall.
    double tail_spectrum_ratio(const Field& f) const;

    // Dense circulant matrices of N and d/dxi.
    Eigen::MatrixXd matrix_N() const;
    Eigen::MatrixXd matrix_ddxi() const;

    // Cosine coefficients a_m of an even field: w_j = sum_m c_m a_m cos(k_m xi_j)
    // with c_0 = c_{M/2} = 1 and c_m = 2 otherwise.
    Eigen::VectorXd cosine_coefficients(const Field& w) const;
    Field from_cosine_coefficients(const Eigen::VectorXd& a) const;

    // Highest retained bin under the active dealiasing rule.
    int cutoff() const;

private:
    struct Plans;
    Field apply_multiplier(const Field& f, const std::vector<std::complex<double>>& mult) const;
    void check(const Field& f) const;

    GridSpec grid_;
    Dealias mode_;
    Field nodes_;
    Eigen::VectorXd n_;
    std::vector<std::complex<double>> mult_N_, mult_C_, mult_D_;
    std::shared_ptr<Plans> plans_;
};

// Mirror about xi = 0 and average: enforces evenness on the node set.
Field symmetrize(const Field& f);

} // namespace wavestab
