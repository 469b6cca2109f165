#include <cmath>
#include <random>

#include "doctest.h"
#include "wavestab/errors.hpp"
#include "wavestab/spectral.hpp"

using namespace wavestab;

TEST_CASE("symbol matches k coth(kh)") {
    // mpmath, 30 digits
    CHECK(symbol_n(1.0, 1.0) == doctest::Approx(1.3130352854993313).epsilon(1e-15));
    CHECK(symbol_n(0.5, 1.0) == doctest::Approx(1.0819767068693264).epsilon(1e-15));
    CHECK(symbol_n(2.0, 1.0) == doctest::Approx(2.0746294414550962).epsilon(1e-15));
    CHECK(symbol_n(1.0, 2.0) == doctest::Approx(1.0373147207275481).epsilon(1e-15));
    CHECK(symbol_n(3.0, 0.5) == doctest::Approx(3.3143741789475357).epsilon(1e-15));
    CHECK(symbol_n(1e-4, 1.0) == doctest::Approx(1.0000000033333333).epsilon(1e-15));
    CHECK(symbol_n(0.0, 2.0) == 0.5);
    CHECK(symbol_n(-1.0, 1.0) == symbol_n(1.0, 1.0));
}

TEST_CASE("N, C and d/dxi act on a resolved cosine") {
    const GridSpec g{40.0, 256, 1.0, 1.0};
    const Spectral sp(g, Dealias::none);
    const int m = 7;
    const double k = 2 * M_PI * m / g.L;
    Field f(g.M), s(g.M);
    for (int j = 0; j < g.M; ++j) {
        f[j] = std::cos(k * g.node(j));
        s[j] = std::sin(k * g.node(j));
    }
    const double n = k / std::tanh(k);
    CHECK((sp.apply_N(f) - n * f).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sp.apply_ddxi(f) + k * s).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sp.apply_C(sp.apply_ddxi(f)) - sp.apply_N(f)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sp.integrate(f.cwiseProduct(f)) == doctest::Approx(g.L / 2).epsilon(1e-12));
}

TEST_CASE("N is symmetric and bounded below by 1/h on random fields") {
    const GridSpec g{30.0, 128, 0.7, 1.0};
    const Spectral sp(g);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 100; ++t) {
        Field f(g.M), q(g.M);
        for (int j = 0; j < g.M; ++j) {
            f[j] = nd(rng);
            q[j] = nd(rng);
        }
        CHECK(sp.inner(sp.apply_N(f), f) >= sp.inner(f, f) / g.h * (1 - 1e-12));
        CHECK(std::abs(sp.inner(sp.apply_N(f), q) - sp.inner(f, sp.apply_N(q))) < 1e-10 * sp.norm(f) * sp.norm(q));
    }
}

TEST_CASE("cosine coefficients round-trip even fields") {
    const GridSpec g{40.0, 256, 1.0, 1.0};
    const Spectral sp(g);
    Field f(g.M);
    for (int j = 0; j < g.M; ++j) f[j] = 1.0 / std::cosh(g.node(j));
    const Field back = sp.from_cosine_coefficients(sp.cosine_coefficients(f));
    CHECK((back - f).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dense matrices agree with the FFT operators") {
    const GridSpec g{20.0, 64, 1.0, 1.0};
    const Spectral sp(g, Dealias::none);
    Field f(g.M);
    for (int j = 0; j < g.M; ++j) f[j] = std::exp(-g.node(j) * g.node(j));
    CHECK((sp.matrix_N() * f - sp.apply_N(f)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sp.matrix_ddxi() * f - sp.apply_ddxi(f)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-thirds dealiasing removes the top third") {
    const GridSpec g{20.0, 64, 1.0, 1.0};
    const Spectral sp(g, Dealias::two_thirds);
    Field f(g.M);
    for (int j = 0; j < g.M; ++j) f[j] = std::cos(2 * M_PI * 30 * g.node(j) / g.L) + 1.0;
    const Field d = sp.dealias(f);
    CHECK((d.array() - 1.0).abs().maxCoeff() < 1e-13);
}

TEST_CASE("invalid input is rejected") {
    CHECK_THROWS_AS(GridSpec({40.0, 32, 1.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(GridSpec({-1.0, 128, 1.0, 1.0}).validate(), ConfigError);
    const Spectral sp(GridSpec{20.0, 64, 1.0, 1.0});
    Field f = Field::Zero(64);
    f[3] = NAN;
    CHECK_THROWS_AS(sp.apply_N(f), InvalidField);
    CHECK_THROWS_AS(sp.apply_N(Field::Zero(10)), InvalidField);
}
