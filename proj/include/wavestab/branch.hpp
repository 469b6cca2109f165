#pragma once

#include <optional>
#include <vector>

#include "wavestab/babenko.hpp"
#include "wavestab/errors.hpp"

namespace wavestab {

struct BranchPoint {
    WaveState wave;
    Observables obs;
    ResolutionReport resolution;
    double s = 0.0;  // arclength in the (w(0), lambda_p) plane
    double dc_ds = 0.0;
    double dE_ds = 0.0;
    double dP_ds = 0.0;
    double dE_dc = 0.0;
    double dP_dc = 0.0;
    bool speed_max = false;    // first local maximum of c
    bool energy_max = false;   // first local maximum of E
    bool tail_limited = false; // tail ratio above tolerance (small start waves)
    bool under_resolved = false;
};

// Quadratic-fit location of a local maximum along the branch.
struct Extremum {
    int index = -1;  // sample nearest to the fitted maximum
    double s = 0.0;
    double value = 0.0;
    double alpha = 0.0;
    double omega = 0.0;
    double omega_alt = 0.0;
    double alpha_uncertainty = 0.0;  // half the local step in alpha
};

struct BranchRecord {
    NewtonOptions tolerances;
    Dealias dealias = Dealias::two_thirds;
    std::vector<BranchPoint> points;
    std::vector<Extremum> speed_maxima;
    std::vector<Extremum> energy_maxima;
    bool derivatives_ready = false;

    std::optional<Extremum> first_speed_max() const;
    std::optional<Extremum> first_energy_max() const;
    // Index of the point whose alpha is closest to `alpha`.
    int nearest_alpha(double alpha) const;
};

class ContinuationStalled : public Error {
public:
    ContinuationStalled(const std::string& what, BranchRecord partial)
        : Error(what), partial(std::move(partial)) {}
    BranchRecord partial;
};

struct ContinuationTarget {
    double alpha = 0.8;
    // Optional stop on omega; compared against the alternative (Froude-scaled)
    // convention when `omega_alt` is set, otherwise against the default one.
    std::optional<double> omega;
    bool omega_alt = false;
};

struct StepControl {
    double ds_initial = 0.02;
    double ds_min = 1e-6;
    double ds_max = 0.05;
    double fine_alpha = 0.75;   // switch to fine steps beyond this amplitude
    double ds_fine = 0.0025;
    double growth = 1.5;
    int good_iterations = 4;    // grow the step when Newton needs at most this many
    int max_newton = 12;
    int max_points = 5000;
    int max_M = 65536;
};

// Solve the start wave at Froude number F from the KdV profile.
WaveState initial_wave(const Spectral& sp, double froude, const NewtonOptions& opts);

BranchRecord continue_branch(const WaveState& start, const ContinuationTarget& target,
                             const StepControl& control, const NewtonOptions& opts,
                             Dealias dealias = Dealias::two_thirds);

// Fills arclength derivatives and extremum flags. Needs at least 5 points.
void branch_derivatives_and_extrema(BranchRecord& branch);

struct SensitivityTraces {
    Field d_c_eta;     // d eta_e / dc at fixed physical x, sampled on the xi grid
    Field d_c_psibar;  // -eta_e - psi_ey d_c_eta
    double c = 0.0;
    double c_minus = 0.0;
    double c_plus = 0.0;
    double P_minus = 0.0;
    double P = 0.0;
    double P_plus = 0.0;
    double dP_dc_fd = 0.0;  // three-point difference of P in c
};

// Surface position x(xi) = (1 + <w>/h) xi + C w; the mean term makes x' = 1 + N w
// hold exactly on the periodic grid.
Field physical_x(const Spectral& sp, const Field& w);

// eta_e(x) of `wave` at the physical abscissas `x` (Newton inversion of x(xi)).
Field eta_at(const Spectral& sp, const Field& w, const Field& x);

// Neighbours at c +/- delta_c are solved at fixed lambda_p when delta_c is given,
// otherwise the adjacent branch samples are used.
SensitivityTraces dc_surface_traces(const BranchRecord& branch, int index,
                                    std::optional<double> delta_c = std::nullopt);

// Same, from a single wave and explicit neighbours (used by the step study).
SensitivityTraces dc_surface_traces(const WaveState& base, const WaveState& minus,
                                    const WaveState& plus, Dealias dealias);

} // namespace wavestab
