#pragma once

#include "wavestab/babenko.hpp"
#include "wavestab/opgrid.hpp"

namespace wavestab {

// Surface traces of a solitary wave in the xi variable.
struct SurfaceFields {
    GridSpec grid;  // h and g; L = 0 on the line grid
    double c = 0.0;
    double lambda_p = 0.0;
    Field w;
    Field wp;       // w'
    Field b;        // 1 + N w
    Field W_re;     // Re W = b
    Field W_im;     // Im W = w'
    Field absW2;    // |W|^2
    Field tau;      // log |W|
    Field theta;    // arg W
    Field psi_ey;   // u_e + c = c b / |W|^2
    Field psi_ex;   // -v_e = -c w' / |W|^2
    Field a_tilde;  // (1/b) d/dxi psi_ex
    Field P_ey;     // -g + psi_ey a_tilde
    Field b_tilde;  // b - 1
    Field c_tilde;  // 1/psi_ey - 1/c
    Field e;        // max(|a_tilde|, |b_tilde|, |c_tilde|)
    Field a_plot;   // (g/c^2) e^{3 tau} cos(theta) + theta'
    Field x;        // physical abscissa of each node

    // Diagonal potential of A0: b P_ey / psi_ey^2.
    Field potential() const;
};

// Throws NearSingular when b or |W| drop below `floor`.
SurfaceFields surface_fields(const Spectral& sp, const WaveState& wave, double floor = 1e-8);

// Same traces on a collocation grid, with x = xi + int_0^xi (b - 1).
SurfaceFields surface_fields(const OperatorGrid& grid, const GridWave& wave, double floor = 1e-8);

// M f = f b + w' C f with C anchored at the left edge.
Field apply_M(const Spectral& sp, const SurfaceFields& sf, const Field& f);
Field apply_M(const OperatorGrid& grid, const SurfaceFields& sf, const Field& f);

} // namespace wavestab
