#include "wavestab/opgrid.hpp"

#include <cmath>
#include <sstream>

#include "wavestab/errors.hpp"
#include "wavestab/linalg.hpp"

namespace wavestab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Derivative of the smooth part g(d) = coth(pi d / 2h) / 2h - 1 / (pi d) of
// the strip kernel of C.
double smooth_kernel_derivative(double d, double h) {
    const double z = kPi * d / (2.0 * h);
    if (std::abs(z) < 0.05) {
        const double z2 = z * z;
        return kPi / (4.0 * h * h) * (1.0 / 3.0 - z2 / 15.0 + 2.0 * z2 * z2 / 189.0 - z2 * z2 * z2 / 675.0);
    }
    if (std::abs(z) > 300.0) return 1.0 / (kPi * d * d);
    const double sh = std::sinh(z);
    return 1.0 / (kPi * d * d) - kPi / (4.0 * h * h) / (sh * sh);
}

// First column of the circulant matrix with Fourier multiplier `mult(m)`,
// m = 0..M/2, on M points.
Eigen::VectorXd circulant_column(const Spectral& sp, const std::vector<std::complex<double>>& mult) {
    Field e = Field::Zero(sp.size());
    e[0] = 1.0;
    Spectrum F = sp.forward(e);
    for (size_t m = 0; m < F.size(); ++m) F[m] *= mult[m];
    return sp.inverse(F);
}

Spectral unit_circle(int M) {
    GridSpec g;
    g.L = 2.0 * kPi;
    g.M = M;
    return Spectral(g, Dealias::none);
}

}  // namespace

OperatorGrid OperatorGrid::periodic(const GridSpec& grid) {
    grid.validate();
    OperatorGrid og;
    og.kind_ = Kind::periodic;
    og.M_ = grid.M;
    og.h_ = grid.h;
    og.g_ = grid.g;
    og.L_ = grid.L;
    const Spectral sp(grid, Dealias::none);
    og.xi_ = sp.nodes();
    og.q_ = Eigen::VectorXd::Constant(grid.M, grid.dxi());
    og.xprime_ = Eigen::VectorXd::Ones(grid.M);
    og.N_ = sp.matrix_N();
    og.D_ = sp.matrix_ddxi();
    return og;
}

OperatorGrid OperatorGrid::line(int M, double ell, double h, double g) {
    if (M < 16 || M % 2 != 0) throw ConfigError("line grid: M must be even and at least 16");
    if (!(ell > 0.0) || !(h > 0.0) || !(g > 0.0)) throw ConfigError("line grid: ell, h, g must be positive");
    OperatorGrid og;
    og.kind_ = Kind::line;
    og.M_ = M;
    og.h_ = h;
    og.g_ = g;
    og.ell_ = ell;
    const int n = M - 1;
    const double ds = 2.0 * kPi / M;
    og.xi_.resize(n);
    og.q_.resize(n);
    og.xprime_.resize(n);
    for (int i = 0; i < n; ++i) {
        const double s = -kPi + ds * (i + 1);
        const double cs = std::cos(0.5 * s);
        og.xi_[i] = ell * std::tan(0.5 * s);
        og.xprime_[i] = ell / (2.0 * cs * cs);
        og.q_[i] = og.xprime_[i] * ds;
    }

    // N = d/dxi H + g' * (.) where H is the line Hilbert transform; under the
    // map, d/dxi H becomes (1/xi') |d/ds| exactly.
    const Spectral circle = unit_circle(M);
    std::vector<std::complex<double>> abs_m(M / 2 + 1), d_m(M / 2 + 1);
    for (int m = 0; m <= M / 2; ++m) {
        abs_m[m] = static_cast<double>(m);
        d_m[m] = m == M / 2 ? 0.0 : std::complex<double>(0.0, m);
    }
    const Eigen::VectorXd ca = circulant_column(circle, abs_m);
    const Eigen::VectorXd cd = circulant_column(circle, d_m);
    og.N_.resize(n, n);
    og.D_.resize(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int k = ((i - j) % M + M) % M;
            og.N_(i, j) = ca[k] / og.xprime_[i] + smooth_kernel_derivative(og.xi_[i] - og.xi_[j], h) * og.q_[j];
            og.D_(i, j) = cd[k] / og.xprime_[i];
        }
    }
    return og;
}

Field OperatorGrid::mirror(const Field& f) const {
    const int n = size();
    Field r(n);
    if (kind_ == Kind::periodic) {
        r[0] = f[0];
        for (int j = 1; j < n; ++j) r[j] = f[n - j];
    } else {
        for (int j = 0; j < n; ++j) r[j] = f[n - 1 - j];
    }
    return r;
}

namespace {

// Primitive of f with an arbitrary constant, plus the value at the left end.
struct Primitive {
    Field F;
    double left = 0.0;
};

Primitive primitive(const OperatorGrid& og, const Field& f, const Eigen::VectorXd& xprime) {
    const int M = og.base_size();
    if (og.kind() == OperatorGrid::Kind::periodic) {
        GridSpec gs;
        gs.L = og.period();
        gs.M = M;
        const Spectral sp(gs, Dealias::none);
        const double mean = f.mean();
        Field F = sp.antiderivative((f.array() - mean).matrix()) + mean * og.xi();
        return {F, F[0]};
    }
    // Integrate f xi' in s; the node at infinity carries zero.
    const Spectral circle = unit_circle(M);
    Field g = Field::Zero(M);
    g.tail(og.size()) = f.cwiseProduct(xprime);
    const double mean = g.mean();
    Field F = circle.antiderivative((g.array() - mean).matrix()) + mean * circle.nodes();
    return {F.tail(og.size()), F[0]};
}

}  // namespace

Field OperatorGrid::integral_from_center(const Field& f) const {
    const Primitive p = primitive(*this, f, xprime_);
    return (p.F.array() - p.F[center()]).matrix();
}

Field OperatorGrid::integral_from_left(const Field& f) const {
    const Primitive p = primitive(*this, f, xprime_);
    return (p.F.array() - p.left).matrix();
}

double OperatorGrid::spectral_ratio(const Field& f) const {
    if (kind_ == Kind::periodic) {
        GridSpec gs;
        gs.L = L_;
        gs.M = M_;
        return Spectral(gs, Dealias::none).tail_spectrum_ratio(f);
    }
    Field g = Field::Zero(M_);
    g.tail(size()) = f;
    return unit_circle(M_).tail_spectrum_ratio(g);
}

Field grid_residual(const OperatorGrid& grid, const Field& w, double lambda_p) {
    const double beta = lambda_p / grid.h();
    const Field Nw = grid.N() * w;
    const Field w2 = w.cwiseProduct(w);
    return Nw - beta * (w + w.cwiseProduct(Nw) + 0.5 * (grid.N() * w2));
}

GridWave solve_on_grid(const OperatorGrid& grid, const Field& guess, double lambda_p, double tol,
                       int max_iterations) {
    const double beta = lambda_p / grid.h();
    Field w = grid.symmetrize(guess);
    GridWave out;
    out.lambda_p = lambda_p;
    out.c = std::sqrt(grid.g() * grid.h() / lambda_p);
    double best = std::numeric_limits<double>::infinity();
    Field best_w = w;
    for (int it = 0;; ++it) {
        const Field R = grid_residual(grid, w, lambda_p);
        const double res = R.cwiseAbs().maxCoeff();
        if (res < best) {
            best = res;
            best_w = w;
            out.iterations = it;
        }
        // Stop at the tolerance, or once rounding has taken over.
        if (res <= tol || it >= max_iterations || !std::isfinite(res)) break;
        if (it >= 3 && res > 0.5 * best && best < 1e3 * tol) break;
        const Field Nw = grid.N() * w;
        Eigen::MatrixXd J = grid.N();
        J.diagonal().array() -= beta * (1.0 + Nw.array());
        J.noalias() -= beta * (w.asDiagonal() * grid.N());
        J.noalias() -= beta * (grid.N() * w.asDiagonal());
        const DenseLU lu(std::move(J));
        w = grid.symmetrize(w - lu.solve(R));
    }
    if (!(best <= tol)) {
        std::ostringstream os;
        os << "solve_on_grid: residual " << best << " above tolerance " << tol;
        throw ConvergenceError(os.str(), best);
    }
    out.w = best_w;
    out.residual_norm = best;
    out.amplitude = best_w[grid.center()];
    out.spectral_ratio = grid.spectral_ratio(best_w);
    return out;
}

Field transfer_wave(const Spectral& src, const Field& w, const OperatorGrid& grid) {
    if (grid.kind() == OperatorGrid::Kind::periodic && grid.period() == src.grid().L) {
        GridSpec gs = src.grid();
        gs.M = grid.base_size();
        return src.resample(w, Spectral(gs, Dealias::none));
    }
    const Spectrum F = src.forward(w);
    const double half = 0.5 * src.grid().L;
    Field out(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.xi()[i];
        out[i] = std::abs(x) < half ? src.evaluate(F, x) : 0.0;
    }
    return out;
}

PreparedWave prepare_stability_wave(const WaveState& src, Dealias src_dealias,
                                    const StabilityGridOptions& opts) {
    if (opts.M_min > opts.M_max) throw ConfigError("stability grid: M_min exceeds M_max");
    const Spectral sp(src.grid, src_dealias);
    const GridSpec& g = src.grid;
    Field guess;
    int guess_M = 0;
    for (int M = opts.M_min;; M *= 2) {
        OperatorGrid grid = [&] {
            if (opts.kind == OperatorGrid::Kind::line) return OperatorGrid::line(M, opts.ell * g.h, g.h, g.g);
            GridSpec gs = g;
            gs.M = M;
            if (opts.period > 0.0) gs.L = opts.period;
            return OperatorGrid::periodic(gs);
        }();
        // Reuse the coarser solution as the starting guess where possible.
        Field start;
        if (guess_M > 0 && opts.kind == OperatorGrid::Kind::periodic) {
            GridSpec a = g, b = g;
            a.M = guess_M;
            b.M = M;
            if (opts.period > 0.0) a.L = b.L = opts.period;
            start = Spectral(a, Dealias::none).resample(guess, Spectral(b, Dealias::none));
        } else {
            start = transfer_wave(sp, src.w, grid);
        }
        GridWave wave = solve_on_grid(grid, start, src.lambda_p, opts.newton_tol);
        const bool ok = wave.spectral_ratio <= opts.spectral_tol;
        if (ok || 2 * M > opts.M_max) return PreparedWave{std::move(grid), std::move(wave), ok};
        guess = wave.w;
        guess_M = M;
    }
}

}  // namespace wavestab
