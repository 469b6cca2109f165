#pragma once

#include <map>

#include "wavestab/branch.hpp"

namespace fixtures {

inline wavestab::GridSpec small_grid() { return {60.0, 2048, 1.0, 1.0}; }

inline wavestab::NewtonOptions loose() {
    wavestab::NewtonOptions o;
    o.check_resolution = false;
    return o;
}

// Amplitude ramp from the KdV start; cached per alpha.
inline const wavestab::WaveState& wave(double alpha) {
    static std::map<double, wavestab::WaveState> cache;
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
    const wavestab::Spectral sp(small_grid());
    wavestab::WaveState s = wavestab::initial_wave(sp, 1.05, loose());
    for (double a = 0.15; a < alpha + 1e-12; a = std::min(alpha, a + 0.1)) {
        s = wavestab::newton_solve_amplitude(sp, s.w * (a / s.amplitude()), s.lambda_p, a, loose());
        if (a == alpha) break;
    }
    return cache.emplace(alpha, s).first->second;
}

}  // namespace fixtures
