#include "wavestab/surface.hpp"

#include <cmath>

#include "wavestab/branch.hpp"
#include "wavestab/errors.hpp"

namespace wavestab {

Field SurfaceFields::potential() const {
    return b.cwiseProduct(P_ey).cwiseQuotient(psi_ey.cwiseProduct(psi_ey));
}

namespace {

// Everything after w', b and the derivative operator are known.
template <class Ddxi>
void fill_from_W(SurfaceFields& s, double floor, const Ddxi& ddxi) {
    s.W_re = s.b;
    s.W_im = s.wp;
    s.absW2 = s.b.cwiseProduct(s.b) + s.wp.cwiseProduct(s.wp);
    if (s.b.minCoeff() <= floor || s.absW2.minCoeff() <= floor * floor)
        throw NearSingular("surface_fields: 1 + N w or |W| below floor");

    const int M = static_cast<int>(s.b.size());
    s.tau = (0.5 * s.absW2.array().log()).matrix();
    s.theta.resize(M);
    for (int j = 0; j < M; ++j) s.theta[j] = std::atan2(s.wp[j], s.b[j]);
    // b > 0 keeps theta inside (-pi/2, pi/2); unwrapping is a safeguard for
    // fields that violate it.
    for (int j = 1; j < M; ++j) {
        while (s.theta[j] - s.theta[j - 1] > M_PI) s.theta[j] -= 2.0 * M_PI;
        while (s.theta[j] - s.theta[j - 1] < -M_PI) s.theta[j] += 2.0 * M_PI;
    }

    s.psi_ey = (s.c * s.b.array() / s.absW2.array()).matrix();
    s.psi_ex = (-s.c * s.wp.array() / s.absW2.array()).matrix();
    s.a_tilde = ddxi(s.psi_ex).cwiseQuotient(s.b);
    s.P_ey = (-s.grid.g + s.psi_ey.array() * s.a_tilde.array()).matrix();
    s.b_tilde = (s.b.array() - 1.0).matrix();
    s.c_tilde = (1.0 / s.psi_ey.array() - 1.0 / s.c).matrix();
    s.e = s.a_tilde.cwiseAbs().cwiseMax(s.b_tilde.cwiseAbs()).cwiseMax(s.c_tilde.cwiseAbs());

    const double lam = s.grid.g / (s.c * s.c);
    const Field e3 = (3.0 * s.tau.array()).exp().matrix();
    s.a_plot = lam * e3.cwiseProduct(s.theta.array().cos().matrix()) + ddxi(s.theta);
}

}  // namespace

SurfaceFields surface_fields(const Spectral& sp, const WaveState& wave, double floor) {
    SurfaceFields s;
    s.grid = sp.grid();
    s.lambda_p = wave.lambda_p;
    s.c = speed_from_lambda(s.grid, wave.lambda_p);
    s.w = wave.w;
    s.wp = sp.apply_ddxi(wave.w);
    s.b = (1.0 + sp.apply_N(wave.w).array()).matrix();
    fill_from_W(s, floor, [&](const Field& f) { return sp.apply_ddxi(f); });
    s.x = physical_x(sp, wave.w);
    return s;
}

SurfaceFields surface_fields(const OperatorGrid& grid, const GridWave& wave, double floor) {
    SurfaceFields s;
    s.grid.h = grid.h();
    s.grid.g = grid.g();
    s.grid.M = grid.size();
    s.grid.L = grid.kind() == OperatorGrid::Kind::periodic ? grid.period() : 0.0;
    s.lambda_p = wave.lambda_p;
    s.c = std::sqrt(grid.g() * grid.h() / wave.lambda_p);
    s.w = wave.w;
    s.wp = grid.D() * wave.w;
    s.b = (1.0 + (grid.N() * wave.w).array()).matrix();
    fill_from_W(s, floor, [&](const Field& f) -> Field { return grid.D() * f; });
    s.x = grid.xi() + grid.integral_from_center(s.b_tilde);
    return s;
}

Field apply_M(const Spectral& sp, const SurfaceFields& sf, const Field& f) {
    return f.cwiseProduct(sf.b) + sf.wp.cwiseProduct(sp.apply_C_edge(f));
}

Field apply_M(const OperatorGrid& grid, const SurfaceFields& sf, const Field& f) {
    return f.cwiseProduct(sf.b) + sf.wp.cwiseProduct(grid.apply_C(f));
}

} // namespace wavestab
