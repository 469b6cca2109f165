#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "wavestab/branch.hpp"
#include "wavestab/stability.hpp"

using namespace wavestab;

TEST_CASE("continuation climbs the branch with increasing speed") {
    const Spectral sp(GridSpec{60.0, 1024, 1.0, 1.0});
    const WaveState start = initial_wave(sp, 1.05, fixtures::loose());
    ContinuationTarget t;
    t.alpha = 0.4;
    const BranchRecord b = continue_branch(start, t, {}, fixtures::loose());
    REQUIRE(b.points.size() >= 5);
    CHECK(b.points.back().obs.alpha >= 0.4);
    for (size_t i = 1; i < b.points.size(); ++i) {
        CHECK(b.points[i].obs.alpha > b.points[i - 1].obs.alpha);
        CHECK(b.points[i].obs.c > b.points[i - 1].obs.c);
        CHECK(b.points[i].s > b.points[i - 1].s);
        CHECK(b.points[i].wave.residual_norm < 1e-10);
    }
    CHECK(b.speed_maxima.empty());
    CHECK(b.energy_maxima.empty());
}

TEST_CASE("mode doubling keeps following the same wave") {
    const Spectral sp(GridSpec{60.0, 256, 1.0, 1.0});
    const WaveState start = initial_wave(sp, 1.05, fixtures::loose());
    ContinuationTarget t;
    t.alpha = 0.5;
    NewtonOptions o = fixtures::loose();
    o.spectral_tol = 1e-12;
    const BranchRecord b = continue_branch(start, t, {}, o);
    CHECK(b.points.back().wave.grid.M > 256);
    CHECK(b.points.back().obs.alpha >= 0.5);
    for (size_t i = 1; i < b.points.size(); ++i) CHECK(b.points[i].obs.alpha > b.points[i - 1].obs.alpha);
}

TEST_CASE("target below the start amplitude gives the start point only") {
    const Spectral sp(GridSpec{60.0, 1024, 1.0, 1.0});
    const WaveState start = initial_wave(sp, 1.05, fixtures::loose());
    ContinuationTarget t;
    t.alpha = 0.01;
    const BranchRecord b = continue_branch(start, t, {}, fixtures::loose());
    CHECK(b.points.size() == 1);
}

TEST_CASE("extrema are located between samples") {
    BranchRecord b;
    for (int i = 0; i < 9; ++i) {
        BranchPoint p;
        p.s = 0.1 * i;
        p.obs.alpha = 0.7 + 0.01 * i;
        p.obs.c = 1.3 - (p.s - 0.43) * (p.s - 0.43);
        p.obs.E = 2.0 - (p.s - 0.25) * (p.s - 0.25);
        p.obs.P = -p.obs.E / p.obs.c;
        p.dc_ds = 1.0;
        b.points.push_back(p);
    }
    branch_derivatives_and_extrema(b);
    const auto c = b.first_speed_max();
    const auto e = b.first_energy_max();
    REQUIRE(c);
    REQUIRE(e);
    CHECK(c->s == doctest::Approx(0.43).epsilon(1e-12));
    CHECK(e->s == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(c->alpha == doctest::Approx(0.743).epsilon(1e-12));
    CHECK(e->alpha < c->alpha);
    CHECK(b.points[c->index].speed_max);
    CHECK(b.points[e->index].energy_max);
}

TEST_CASE("appendix identity converges at second order in the speed step") {
    const WaveState& w = fixtures::wave(0.5);
    const Spectral sp(w.grid);
    BranchRecord b;
    b.tolerances = fixtures::loose();
    for (double dc : {-2e-3, 0.0, 2e-3}) {
        BranchPoint p;
        p.wave = dc == 0.0 ? w : newton_solve(sp, w.w, lambda_from_speed(w.grid, w.c + dc), fixtures::loose());
        p.obs = observables(sp, p.wave);
        b.points.push_back(p);
    }
    const double r1 = appendix_identity_check(b, 1, 1e-3);
    const double r2 = appendix_identity_check(b, 1, 5e-4);
    CHECK(r1 < 1e-3);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.25));
    const DPdcCheck d = dPdc_formula_check(b, 1, 1e-3);
    CHECK(d.relative_error < 1e-2);
}
