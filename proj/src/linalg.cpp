#include "wavestab/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <lapacke.h>

#include "wavestab/errors.hpp"

namespace wavestab {

GmresResult gmres(const LinearMap& A, const Eigen::VectorXd& b, const LinearMap& precond,
                  const GmresOptions& opts) {
    const int n = static_cast<int>(b.size());
    const int m = std::max(1, std::min(opts.restart, n));
    GmresResult out;
    out.x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    auto P = [&](const Eigen::VectorXd& v) { return precond ? precond(v) : v; };
    const double target = std::max(opts.rel_tol * bnorm, opts.abs_tol);

    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), g(m + 1);
    Eigen::VectorXd r = b;
    int total = 0;
    while (total < opts.max_iterations) {
        double beta = r.norm();
        out.rel_residual = beta / bnorm;
        if (beta <= target) {
            out.converged = true;
            break;
        }
        V.col(0) = r / beta;
        g.setZero();
        g[0] = beta;
        H.setZero();
        int k = 0;
        for (; k < m && total < opts.max_iterations; ++k, ++total) {
            Eigen::VectorXd w = A(P(V.col(k)));
            for (int i = 0; i <= k; ++i) {
                H(i, k) = V.col(i).dot(w);
                w -= H(i, k) * V.col(i);
            }
            // One reorthogonalization pass keeps the basis clean for long cycles.
            for (int i = 0; i <= k; ++i) {
                const double d = V.col(i).dot(w);
                H(i, k) += d;
                w -= d * V.col(i);
            }
            H(k + 1, k) = w.norm();
            if (H(k + 1, k) > 0.0) V.col(k + 1) = w / H(k + 1, k);
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
                H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
                H(i, k) = t;
            }
            const double rho = std::hypot(H(k, k), H(k + 1, k));
            cs[k] = rho > 0.0 ? H(k, k) / rho : 1.0;
            sn[k] = rho > 0.0 ? H(k + 1, k) / rho : 0.0;
            H(k, k) = rho;
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            out.iterations = total + 1;
            if (std::abs(g[k + 1]) <= target) {
                ++k;
                ++total;
                break;
            }
        }
        Eigen::VectorXd y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        out.x += P(V.leftCols(k) * y);
        r = b - A(out.x);
    }
    out.rel_residual = r.norm() / bnorm;
    out.converged = out.converged || r.norm() <= target;
    return out;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXd S = 0.5 * (A + A.transpose());
    Eigen::VectorXd ev(n);
    const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, S.data(), n, ev.data());
    if (info != 0) throw Error("dsyevd failed");
    return ev;
}

void symmetric_eigen(const Eigen::MatrixXd& A, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    const int n = static_cast<int>(A.rows());
    vectors = 0.5 * (A + A.transpose());
    values.resize(n);
    const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, vectors.data(), n, values.data());
    if (info != 0) throw Error("dsyevd failed");
}

std::vector<std::complex<double>> general_eigenvalues(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXd H = A;
    std::vector<double> wr(n), wi(n);
    const int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, H.data(), n, wr.data(), wi.data(),
                                   nullptr, 1, nullptr, 1);
    if (info != 0) throw Error("dgeev failed");
    std::vector<std::complex<double>> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = {wr[i], wi[i]};
    return ev;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& A) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    Eigen::MatrixXd B = A;
    Eigen::VectorXd s(std::min(m, n));
    const int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, B.data(), m, s.data(), nullptr, 1,
                                    nullptr, 1);
    if (info != 0) throw Error("dgesdd failed");
    return s;
}

DenseLU::DenseLU(Eigen::MatrixXd A) : lu_(std::move(A)) {
    const int n = static_cast<int>(lu_.rows());
    ipiv_.resize(n);
    const int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, lu_.data(), n, ipiv_.data());
    singular_ = info > 0;
    if (info < 0) throw Error("dgetrf failed");
    int sign = 1;
    double lo = INFINITY, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = lu_(i, i);
        if (u < 0.0) sign = -sign;
        if (ipiv_[i] != i + 1) sign = -sign;
        lo = std::min(lo, std::abs(u));
        hi = std::max(hi, std::abs(u));
    }
    det_sign_ = singular_ ? 0 : sign;
    pivot_ratio_ = hi > 0.0 ? lo / hi : 0.0;
}

void DenseLU::solve_in_place(Eigen::MatrixXd& B) const {
    if (singular_) throw AssemblyError("LU solve with a singular factor");
    const int n = size();
    const int info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n, static_cast<int>(B.cols()), lu_.data(),
                                    n, ipiv_.data(), B.data(), n);
    if (info != 0) throw Error("dgetrs failed");
}

Eigen::VectorXd DenseLU::solve(const Eigen::VectorXd& b) const {
    Eigen::MatrixXd B = b;
    solve_in_place(B);
    return B.col(0);
}

std::vector<RitzPair> shift_invert_arnoldi(const DenseLU& lu, const Eigen::MatrixXd& A, double shift,
                                           const Eigen::VectorXd& start, int wanted, int krylov_dim,
                                           int restarts) {
    const int n = lu.size();
    const int m = std::min(krylov_dim, n - 1);
    Eigen::VectorXd v0 = start;
    if (v0.norm() == 0.0) v0 = Eigen::VectorXd::Ones(n);
    std::vector<RitzPair> best;
    for (int pass = 0; pass <= restarts; ++pass) {
        Eigen::MatrixXd V(n, m + 1);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
        V.col(0) = v0 / v0.norm();
        int k = 0;
        for (; k < m; ++k) {
            Eigen::VectorXd w = lu.solve(V.col(k));
            for (int rep = 0; rep < 2; ++rep) {
                for (int i = 0; i <= k; ++i) {
                    const double d = V.col(i).dot(w);
                    H(i, k) += d;
                    w -= d * V.col(i);
                }
            }
            H(k + 1, k) = w.norm();
            if (H(k + 1, k) < 1e-14 * H.col(k).norm()) {
                ++k;
                break;
            }
            V.col(k + 1) = w / H(k + 1, k);
        }
        Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(k, k));
        const Eigen::VectorXcd theta = es.eigenvalues();
        const Eigen::MatrixXcd Y = es.eigenvectors();
        std::vector<int> order(k);
        for (int i = 0; i < k; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return std::abs(theta[a]) > std::abs(theta[b]); });
        best.clear();
        bool converged = true;
        Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
        const double scale = std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
        for (int t = 0; t < std::min(wanted, k); ++t) {
            const int i = order[t];
            RitzPair p;
            p.value = shift + 1.0 / theta[i];
            p.vector = V.leftCols(k).cast<std::complex<double>>() * Y.col(i);
            p.vector /= p.vector.norm();
            Eigen::VectorXcd Ax(n);
            Ax.real() = A * p.vector.real();
            Ax.imag() = A * p.vector.imag();
            const Eigen::VectorXcd res = Ax - p.value * p.vector;
            if (res.norm() > 1e-9 * scale) converged = false;
            next += p.vector.real() + p.vector.imag();
            best.push_back(std::move(p));
        }
        if (converged || pass == restarts) break;
        v0 = next.norm() > 0.0 ? next : Eigen::VectorXd(V.col(0));
    }
    return best;
}

double norm2_estimate(const Eigen::MatrixXd& A, int iterations) {
    Eigen::VectorXd x = Eigen::VectorXd::Ones(A.cols());
    // A deterministic but non-symmetric start avoids parity-orthogonal seeds.
    for (int i = 0; i < x.size(); ++i) x[i] += 0.5 * std::sin(1.7 * i + 0.3);
    double s = 0.0;
    for (int it = 0; it < iterations; ++it) {
        x /= x.norm();
        Eigen::VectorXd y = A * x;
        s = y.norm();
        x = A.transpose() * y;
        if (x.norm() == 0.0) return 0.0;
    }
    return s;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    for (int t = 0; t < count; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace wavestab
