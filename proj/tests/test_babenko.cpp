#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "wavestab/babenko.hpp"
#include "wavestab/errors.hpp"

using namespace wavestab;

namespace {

Field smooth_random(const Spectral& sp, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> nd;
    const GridSpec& g = sp.grid();
    Field f = Field::Zero(g.M);
    for (int m = 1; m <= 12; ++m) {
        const double k = 2 * M_PI * m / g.L, a = nd(rng) / m, b = nd(rng) / m;
        for (int j = 0; j < g.M; ++j) f[j] += a * std::cos(k * g.node(j)) + b * std::sin(k * g.node(j));
    }
    return scale * f;
}

// Gauss-Legendre nodes and weights on (a, b).
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5)), dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = 0.5 * (a + b) + 0.5 * (b - a) * z;
        w[i] = (b - a) / ((1 - z * z) * dp * dp);
    }
}

// Energies of an even periodic surface from its harmonic extension into the
// strip -h < s < 0 (u = w on top, 0 on the bed), integrated by quadrature.
void strip_energies(const GridSpec& g, const Field& w, double c, double& kinetic, double& potential) {
    const int M = g.M;
    const int K = M / 2;
    std::vector<double> a(K + 1, 0.0), k(K + 1);
    for (int m = 0; m <= K; ++m) {
        k[m] = 2 * M_PI * m / g.L;
        for (int j = 0; j < M; ++j) a[m] += w[j] * std::cos(k[m] * g.node(j));
        a[m] *= (m == 0 || m == K ? 1.0 : 2.0) / M;
    }
    std::vector<double> zs, ws;
    gauss_legendre(96, -g.h, 0.0, zs, ws);
    auto S = [&](int m, double s) {  // sinh(k(s+h)) / sinh(kh) and its s-derivative
        if (m == 0) return std::pair{(s + g.h) / g.h, 1.0 / g.h};
        const double e = std::exp(k[m] * s), q = std::exp(-2 * k[m] * (s + g.h)), r = std::exp(-2 * k[m] * g.h);
        return std::pair{e * (1 - q) / (1 - r), k[m] * e * (1 + q) / (1 - r)};
    };
    double dir = 0.0;
    for (size_t l = 0; l < zs.size(); ++l) {
        double sum = 0.0;
        for (int j = 0; j < M; ++j) {
            double ux = 0, us = 0;
            for (int m = 0; m <= K; ++m) {
                const auto [v, dv] = S(m, zs[l]);
                ux -= a[m] * k[m] * std::sin(k[m] * g.node(j)) * v;
                us += a[m] * std::cos(k[m] * g.node(j)) * dv;
            }
            sum += ux * ux + us * us;
        }
        dir += ws[l] * sum * g.dxi();
    }
    kinetic = 0.5 * c * c * dir;
    potential = 0.0;
    for (int j = 0; j < M; ++j) {
        double us = 0;
        for (int m = 0; m <= K; ++m) us += a[m] * std::cos(k[m] * g.node(j)) * S(m, 0.0).second;
        potential += 0.5 * g.g * w[j] * w[j] * (1.0 + us) * g.dxi();
    }
}

}  // namespace

TEST_CASE("flat state solves the wave equation for every lambda") {
    const Spectral sp(fixtures::small_grid());
    const Field z = Field::Zero(sp.size());
    for (double lp : {0.5, 0.9, 1.2}) CHECK(babenko_residual(sp, z, lp).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("residual is the gradient of the functional") {
    const Spectral sp(GridSpec{40.0, 512, 1.0, 1.0});
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const Field w = smooth_random(sp, rng, 0.05), v = smooth_random(sp, rng, 1.0);
        const double lp = 0.85, eps = 1e-5;
        const double fd = (functional_J(sp, w + eps * v, lp) - functional_J(sp, w - eps * v, lp)) / (2 * eps);
        const double an = sp.inner(babenko_residual(sp, w, lp), v);
        CHECK(fd == doctest::Approx(an).epsilon(1e-6));
    }
}

TEST_CASE("Jacobian matches finite differences and is symmetric") {
    const Spectral sp(GridSpec{40.0, 512, 1.0, 1.0});
    std::mt19937_64 rng(12);
    const Field w = smooth_random(sp, rng, 0.05);
    for (int t = 0; t < 5; ++t) {
        const Field u = smooth_random(sp, rng, 1.0), v = smooth_random(sp, rng, 1.0);
        const double lp = 0.85, eps = 1e-6;
        const Field fd = (babenko_residual(sp, w + eps * v, lp) - babenko_residual(sp, w - eps * v, lp)) / (2 * eps);
        const Field an = babenko_jacobian_apply(sp, w, lp, v);
        CHECK((fd - an).norm() < 1e-7 * an.norm());
        const double a = sp.inner(babenko_jacobian_apply(sp, w, lp, u), v);
        const double b = sp.inner(u, babenko_jacobian_apply(sp, w, lp, v));
        CHECK(std::abs(a - b) < 1e-12 * sp.norm(u) * sp.norm(v));
    }
}

TEST_CASE("KdV start converges to a nearby solitary wave") {
    const Spectral sp(GridSpec{120.0, 2048, 1.0, 1.0});
    const double F = 1.03;
    const WaveState s = newton_solve(sp, kdv_predictor(sp, F), 1.0 / (F * F), fixtures::loose());
    CHECK(s.newton_iterations <= 6);
    CHECK(s.amplitude() == doctest::Approx(F * F - 1.0).epsilon(0.05));
    CHECK((s.w - symmetrize(s.w)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("amplitude-constrained solve hits the crest height") {
    const WaveState& s = fixtures::wave(0.5);
    const Spectral sp(s.grid);
    CHECK(s.amplitude() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(babenko_residual(sp, s.w, s.lambda_p).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(s.lambda_p < 1.0);
    const Observables o = observables(sp, s);
    CHECK(o.F > 1.0);
    CHECK(o.delta0 > 0.0);
    CHECK(o.alpha == doctest::Approx(0.5));
}

TEST_CASE("energies agree with the harmonic extension in the strip") {
    const Spectral sp(GridSpec{40.0, 256, 1.0, 1.0});
    WaveState s = initial_wave(sp, 1.05, fixtures::loose());
    for (double a : {0.15, 0.2, 0.25, 0.3})
        s = newton_solve_amplitude(sp, s.w * (a / s.amplitude()), s.lambda_p, a, fixtures::loose());
    const Observables o = observables(sp, s);
    double ke = 0, pe = 0;
    strip_energies(sp.grid(), s.w, o.c, ke, pe);
    CHECK(o.kinetic == doctest::Approx(ke).epsilon(1e-8));
    CHECK(o.potential == doctest::Approx(pe).epsilon(1e-8));
    // Kinetic energy and impulse: KE = -(c/2) P.
    CHECK(o.kinetic == doctest::Approx(-0.5 * o.c * o.P).epsilon(1e-13));
}

TEST_CASE("Benjamin relation along the branch") {
    const WaveState& s = fixtures::wave(0.3);
    const Spectral sp(s.grid);
    const double dc = 1e-3;
    const Observables m = observables(sp, newton_solve(sp, s.w, lambda_from_speed(s.grid, s.c - dc), fixtures::loose()));
    const Observables p = observables(sp, newton_solve(sp, s.w, lambda_from_speed(s.grid, s.c + dc), fixtures::loose()));
    const double dE = (p.E - m.E) / (2 * dc), dP = (p.P - m.P) / (2 * dc);
    CHECK(std::abs(dE + s.c * dP) < 1e-4 * std::abs(dE));
}

TEST_CASE("solver failures raise typed errors") {
    const Spectral sp(fixtures::small_grid());
    NewtonOptions o = fixtures::loose();
    o.max_iterations = 1;
    const Field guess = kdv_predictor(sp, 1.2);
    try {
        newton_solve(sp, guess, 1.0 / 1.44, o);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.last_residual > 0.0);
    }
    // Long-tailed small wave on a short period.
    const Spectral shortp(GridSpec{40.0, 512, 1.0, 1.0});
    NewtonOptions strict;
    CHECK_THROWS_AS(newton_solve(shortp, kdv_predictor(shortp, 1.01), 1.0 / 1.0201, strict), ResolutionError);
}
