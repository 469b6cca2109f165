#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "fixtures.hpp"
#include "wavestab/linalg.hpp"
#include "wavestab/stability.hpp"

using namespace wavestab;

namespace {

Field gaussian(const Field& x, double shift = 0.0) { return (-(x.array() - shift).square()).exp().matrix(); }

struct Mid {
    PreparedWave pw;
    SurfaceFields sf;
    double dE_dc;
};

const Mid& mid_branch() {
    static const Mid m = [] {
        const WaveState& w = fixtures::wave(0.5);
        const Spectral sp(w.grid);
        const double dc = 1e-3;
        const auto E = [&](double c) {
            return observables(sp, newton_solve(sp, w.w, lambda_from_speed(w.grid, c), fixtures::loose())).E;
        };
        StabilityGridOptions o;
        o.spectral_tol = 1e-10;
        PreparedWave pw = prepare_stability_wave(w, Dealias::two_thirds, o);
        SurfaceFields sf = surface_fields(pw.grid, pw.wave);
        return Mid{std::move(pw), std::move(sf), (E(w.c + dc) - E(w.c - dc)) / (2 * dc)};
    }();
    return m;
}

}  // namespace

TEST_CASE("line-grid N agrees with a wide periodic box") {
    const OperatorGrid line = OperatorGrid::line(512, 2.0, 1.0, 1.0);
    const GridSpec box{160.0, 8192, 1.0, 1.0};
    const Spectral sp(box, Dealias::none);
    Field nodes(box.M);
    for (int j = 0; j < box.M; ++j) nodes[j] = box.node(j);
    const Spectrum F = sp.forward(sp.apply_N(gaussian(nodes, 0.3)));
    const Field Nf = line.N() * gaussian(line.xi(), 0.3);
    double err = 0.0;
    for (int i = 0; i < line.size(); ++i)
        if (std::abs(line.xi()[i]) < 20.0) err = std::max(err, std::abs(Nf[i] - sp.evaluate(F, line.xi()[i])));
    CHECK(err < 1e-8);
}

TEST_CASE("line-grid calculus") {
    const OperatorGrid g = OperatorGrid::line(512, 2.0, 1.0, 1.0);
    const Field x = g.xi();
    const Field f = gaussian(x);
    const Field df = (-2.0 * x.array() * f.array()).matrix();
    CHECK((g.D() * f - df).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((g.integral_from_left(df) - f).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((g.mirror(df) + df).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((g.apply_C(df) - g.N() * f).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(g.inner(f, f) == doctest::Approx(std::sqrt(M_PI / 2)).epsilon(1e-10));
    CHECK(g.spectral_ratio(f) < 1e-12);
}

TEST_CASE("flat state: A0 spectrum is the shifted symbol") {
    const GridSpec gs{60.0, 128, 1.0, 1.0};
    const OperatorGrid grid = OperatorGrid::periodic(gs);
    GridWave flat;
    flat.w = Field::Zero(gs.M);
    flat.lambda_p = 0.8;
    flat.c = std::sqrt(1.0 / 0.8);
    const SurfaceFields sf = surface_fields(grid, flat);
    const double shift = 1.0 / (flat.c * flat.c);
    std::vector<double> want;
    for (int j = 0; j < gs.M; ++j) {
        const int m = j <= gs.M / 2 ? j : j - gs.M;
        want.push_back(symbol_n(2 * M_PI * m / gs.L, 1.0) - shift);
    }
    std::sort(want.begin(), want.end());
    const Eigen::VectorXd got = symmetric_eigenvalues(assemble_A0(grid, sf));
    for (int j = 0; j < gs.M; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-10));

    // A_lambda is diagonal in Fourier space: n(k) + g k^2 / (lambda + i c k)^2.
    const double lam = 0.3;
    const auto ev = general_eigenvalues(assemble_A_lambda_fast(grid, sf, lam).A);
    for (int j = 0; j < gs.M; ++j) {
        const int m = j <= gs.M / 2 ? j : j - gs.M;
        const double k = 2 * M_PI * m / gs.L;
        if (std::abs(m) == gs.M / 2) continue;  // Nyquist derivative is zeroed
        const std::complex<double> sym = symbol_n(k, 1.0) + k * k / std::pow(std::complex<double>(lam, flat.c * k), 2);
        double best = INFINITY;
        for (const auto& z : ev) best = std::min(best, std::abs(z - sym));
        CHECK(best < 1e-8 * std::abs(sym));
    }
}

TEST_CASE("mid-branch operator structure") {
    const Mid& m = mid_branch();
    const StabilityReport r = spectrum_report(m.pw.grid, m.sf);
    CHECK(r.n_minus == 1);
    CHECK(r.kernel_residual < 1e-8);
    CHECK(r.a0_asymmetry < 1e-12);
    CHECK(r.smallest_singular[1] > 1e-3);
    CHECK((m.sf.potential() + m.sf.a_plot).cwiseAbs().maxCoeff() < 1e-8 * m.sf.a_plot.cwiseAbs().maxCoeff());
    const Field Mpsi = apply_M(m.pw.grid, m.sf, m.sf.psi_ex) + m.sf.c * m.sf.wp;
    CHECK(m.pw.grid.norm(Mpsi) < 1e-8 * m.pw.grid.norm(m.sf.wp));

    const OperatorBundle b = assemble_A_lambda(m.pw.grid, m.sf, 0.2);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(b.E_plus.rows(), b.E_plus.cols());
    CHECK(weighted_norm(m.pw.grid, m.sf, b.E_plus) <= 1.0 + 1e-8);
    CHECK(weighted_norm(m.pw.grid, m.sf, b.E_minus) <= 1.0 + 1e-8);
    CHECK(weighted_norm(m.pw.grid, m.sf, I - b.E_plus) <= 1.0 + 1e-8);
    CHECK(weighted_antisymmetry_defect(m.pw.grid, m.sf, b.D_tilde) < 1e-8 * weighted_norm(m.pw.grid, m.sf, b.D_tilde));
    const LambdaOperator fast = assemble_A_lambda_fast(m.pw.grid, m.sf, 0.2);
    CHECK((fast.A - b.A_lambda).cwiseAbs().maxCoeff() < 1e-9 * b.A_lambda.cwiseAbs().maxCoeff());
}

TEST_CASE("moving kernel follows the energy-speed slope") {
    const Mid& m = mid_branch();
    const MovingKernel mk = track_k_lambda(m.pw.grid, m.sf, m.dE_dc, default_k_lambdas(m.sf.c, 1.0));
    // -(1/c) dE/dc / |psi_ex|^2 at alpha = 0.5, h = g = 1
    CHECK(mk.rhs == doctest::Approx(-40.56).epsilon(2e-3));
    CHECK(mk.relative_error() < 0.05);
    CHECK(mk.samples.size() >= 3);
    for (size_t i = 1; i < mk.samples.size(); ++i) CHECK(mk.samples[i].lambda > mk.samples[i - 1].lambda);
}

TEST_CASE("no growing mode on the lower branch") {
    const Mid& m = mid_branch();
    CHECK_FALSE(find_growing_mode(m.pw.grid, m.sf));
}

TEST_CASE("KdV scaling of the lowest A0 eigenvalues") {
    const KdvScalingResult r = kdv_scaling_check(0.15);
    CHECK(r.max_relative_error < 0.15);
    CHECK(r.eigenvalues[0] < 0.0);
    CHECK(std::abs(r.eigenvalues[1]) < 1e-8);
    CHECK(r.eigenvalues[2] > 0.0);
}
