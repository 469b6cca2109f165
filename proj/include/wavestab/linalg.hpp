#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace wavestab {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GmresOptions {
    double rel_tol = 1e-11;
    double abs_tol = 0.0;
    int restart = 80;
    int max_iterations = 800;
};

struct GmresResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

// Right-preconditioned restarted GMRES. `precond` may be empty.
GmresResult gmres(const LinearMap& A, const Eigen::VectorXd& b, const LinearMap& precond,
                  const GmresOptions& opts = {});

// LAPACK-backed dense kernels.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& A);
void symmetric_eigen(const Eigen::MatrixXd& A, Eigen::VectorXd& values, Eigen::MatrixXd& vectors);
std::vector<std::complex<double>> general_eigenvalues(const Eigen::MatrixXd& A);
Eigen::VectorXd singular_values(const Eigen::MatrixXd& A);

// Dense LU factorization with in-place solves and the sign of det(A).
class DenseLU {
public:
    DenseLU() = default;
    explicit DenseLU(Eigen::MatrixXd A);
    bool singular() const { return singular_; }
    int det_sign() const { return det_sign_; }
    // Smallest |U_ii| relative to the largest; a cheap conditioning proxy.
    double pivot_ratio() const { return pivot_ratio_; }
    void solve_in_place(Eigen::MatrixXd& B) const;
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    int size() const { return static_cast<int>(lu_.rows()); }

private:
    Eigen::MatrixXd lu_;
    std::vector<int> ipiv_;
    bool singular_ = false;
    int det_sign_ = 0;
    double pivot_ratio_ = 0.0;
};

struct RitzPair {
    std::complex<double> value;
    Eigen::VectorXcd vector;
};

// Eigenpairs of A nearest `shift` by Arnoldi on (A - shift)^{-1}. The LU must
// factor A - shift. Returns up to `wanted` pairs sorted by distance to shift.
std::vector<RitzPair> shift_invert_arnoldi(const DenseLU& lu, const Eigen::MatrixXd& A, double shift,
                                           const Eigen::VectorXd& start, int wanted,
                                           int krylov_dim = 30, int restarts = 6);

// Largest singular value by power iteration on A^T A.
double norm2_estimate(const Eigen::MatrixXd& A, int iterations = 60);

// Run fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

} // namespace wavestab
