#include "wavestab/branch.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "wavestab/surface.hpp"

namespace wavestab {

std::optional<Extremum> BranchRecord::first_speed_max() const {
    if (speed_maxima.empty()) return std::nullopt;
    return speed_maxima.front();
}

std::optional<Extremum> BranchRecord::first_energy_max() const {
    if (energy_maxima.empty()) return std::nullopt;
    return energy_maxima.front();
}

int BranchRecord::nearest_alpha(double alpha) const {
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < points.size(); ++i) {
        const double d = std::abs(points[i].obs.alpha - alpha);
        if (d < dist) {
            dist = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

WaveState initial_wave(const Spectral& sp, double froude, const NewtonOptions& opts) {
    NewtonOptions o = opts;
    o.check_resolution = false;
    return newton_solve(sp, kdv_predictor(sp, froude), 1.0 / (froude * froude), o);
}

namespace {

class SpectralCache {
public:
    explicit SpectralCache(Dealias d) : dealias_(d) {}
    const Spectral& get(const GridSpec& g) {
        auto it = cache_.find(g.M);
        if (it == cache_.end()) it = cache_.emplace(g.M, std::make_unique<Spectral>(g, dealias_)).first;
        return *it->second;
    }

private:
    Dealias dealias_;
    std::map<int, std::unique_ptr<Spectral>> cache_;
};

BranchPoint make_point(const Spectral& sp, const WaveState& wave, const NewtonOptions& opts,
                       double s) {
    BranchPoint p;
    p.wave = wave;
    p.obs = observables(sp, wave);
    p.resolution = resolution_report(sp, wave.w, opts);
    p.tail_limited = !p.resolution.tail_ok;
    p.under_resolved = !p.resolution.spectral_ok;
    p.s = s;
    return p;
}

bool reached(const ContinuationTarget& t, const Observables& o) {
    if (o.alpha >= t.alpha) return true;
    if (t.omega) return (t.omega_alt ? o.omega_alt : o.omega) >= *t.omega;
    return false;
}

WaveState state_from(const Spectral& sp, const BorderedResult& r) {
    WaveState s;
    s.grid = sp.grid();
    s.w = r.w;
    s.lambda_p = r.lambda_p;
    s.c = speed_from_lambda(sp.grid(), r.lambda_p);
    s.residual_norm = r.residual_norm;
    s.newton_iterations = r.iterations;
    return s;
}

} // namespace

BranchRecord continue_branch(const WaveState& start, const ContinuationTarget& target,
                             const StepControl& control, const NewtonOptions& opts,
                             Dealias dealias) {
    BranchRecord rec;
    rec.tolerances = opts;
    rec.dealias = dealias;
    SpectralCache cache(dealias);
    const Spectral* sp = &cache.get(start.grid);
    int c0 = start.grid.center();

    rec.points.push_back(make_point(*sp, start, opts, 0.0));
    if (reached(target, rec.points.back().obs)) return rec;

    NewtonOptions nopt = opts;
    nopt.max_iterations = control.max_newton;
    nopt.check_resolution = false;

    double ds = control.ds_initial;
    double s = 0.0;
    Field w_cur = start.w, w_prev;
    double l_cur = start.lambda_p, l_prev = 0.0;
    bool have_prev = false;

    while (static_cast<int>(rec.points.size()) < control.max_points) {
        const double a_cur = w_cur[c0];
        const double cap = a_cur >= control.fine_alpha ? control.ds_fine : control.ds_max;
        ds = std::min(ds, cap);
        // Do not stride deep into the fine region on a coarse step.
        if (a_cur < control.fine_alpha)
            ds = std::min(ds, std::max(control.fine_alpha - a_cur, control.ds_fine));

        Field w_pred;
        double l_pred;
        BorderRow row;
        double ta = 1.0, tl = 0.0;
        if (!have_prev) {
            const double a_new = a_cur + ds;
            w_pred = w_cur * (a_new / a_cur);
            l_pred = l_cur;
            row = {1.0, 0.0, a_new};
        } else {
            const double da = a_cur - w_prev[c0];
            const double dl = l_cur - l_prev;
            const double d = std::hypot(da, dl);
            ta = da / d;
            tl = dl / d;
            const double r = ds / d;
            w_pred = w_cur + r * (w_cur - w_prev);
            l_pred = l_cur + r * (l_cur - l_prev);
            row = {ta, tl, ta * a_cur + tl * l_cur + ds};
        }
        const BorderedResult res = bordered_newton(*sp, w_pred, l_pred, row, nopt);
        const double a_new = res.w[c0];
        const bool forward = ta * (a_new - a_cur) + tl * (res.lambda_p - l_cur) > 0.0;
        if (!res.converged || !(res.lambda_p > 0.0) || !(res.lambda_p < 1.0) || !forward) {
            ds *= 0.5;
            if (ds < control.ds_min) {
                std::ostringstream os;
                os << "continuation stalled at alpha = " << a_cur << " (step below " << control.ds_min
                   << ", last residual " << res.residual_norm << ")";
                if (rec.points.size() >= 5) branch_derivatives_and_extrema(rec);
                throw ContinuationStalled(os.str(), rec);
            }
            continue;
        }

        const ResolutionReport rep = resolution_report(*sp, res.w, opts);
        if (!rep.spectral_ok && sp->size() < control.max_M) {
            GridSpec g2 = sp->grid();
            g2.M *= 2;
            const Spectral* sp2 = &cache.get(g2);
            w_cur = sp->resample(w_cur, *sp2);
            if (have_prev) w_prev = sp->resample(w_prev, *sp2);
            const BorderedResult pol = bordered_newton(*sp2, w_cur, l_cur, {1.0, 0.0, a_cur}, nopt);
            if (pol.converged) {
                w_cur = pol.w;
                l_cur = pol.lambda_p;
            }
            sp = sp2;
            c0 = g2.center();
            continue;
        }

        s += std::hypot(a_new - a_cur, res.lambda_p - l_cur);
        rec.points.push_back(make_point(*sp, state_from(*sp, res), opts, s));
        w_prev = w_cur;
        l_prev = l_cur;
        have_prev = true;
        w_cur = res.w;
        l_cur = res.lambda_p;
        if (res.iterations <= control.good_iterations) ds *= control.growth;
        if (reached(target, rec.points.back().obs)) break;
    }
    if (rec.points.size() >= 5) branch_derivatives_and_extrema(rec);
    return rec;
}

namespace {

// Second-order derivative at node 1 of three samples (x0, x1, x2).
double three_point(double x0, double x1, double x2, double f0, double f1, double f2, int at) {
    // Lagrange basis derivatives evaluated at x_at.
    const double xs[3] = {x0, x1, x2};
    const double fs[3] = {f0, f1, f2};
    const double x = xs[at];
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
        double li = 0.0;
        for (int j = 0; j < 3; ++j) {
            if (j == i) continue;
            double term = 1.0 / (xs[i] - xs[j]);
            for (int k = 0; k < 3; ++k) {
                if (k == i || k == j) continue;
                term *= (x - xs[k]) / (xs[i] - xs[k]);
            }
            li += term;
        }
        d += fs[i] * li;
    }
    return d;
}

double quad_interp(double x0, double x1, double x2, double f0, double f1, double f2, double x) {
    const double l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
    const double l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
    const double l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
    return f0 * l0 + f1 * l1 + f2 * l2;
}

template <class Get>
std::vector<Extremum> local_maxima(const std::vector<BranchPoint>& pts, Get get) {
    std::vector<Extremum> out;
    for (size_t i = 1; i + 1 < pts.size(); ++i) {
        const double fm = get(pts[i - 1]), f0 = get(pts[i]), fp = get(pts[i + 1]);
        if (!(f0 >= fm && f0 > fp)) continue;
        const double sm = pts[i - 1].s, s0 = pts[i].s, sp = pts[i + 1].s;
        const double d1 = (f0 - fm) / (s0 - sm);
        const double d2 = ((fp - f0) / (sp - s0) - d1) / (sp - sm);
        Extremum e;
        e.s = d2 < 0.0 ? 0.5 * (sm + s0) - d1 / (2.0 * d2) : s0;
        e.s = std::clamp(e.s, sm, sp);
        e.value = quad_interp(sm, s0, sp, fm, f0, fp, e.s);
        auto at = [&](auto field) {
            return quad_interp(sm, s0, sp, field(pts[i - 1]), field(pts[i]), field(pts[i + 1]), e.s);
        };
        e.alpha = at([](const BranchPoint& p) { return p.obs.alpha; });
        e.omega = at([](const BranchPoint& p) { return p.obs.omega; });
        e.omega_alt = at([](const BranchPoint& p) { return p.obs.omega_alt; });
        e.alpha_uncertainty = 0.5 * std::max(std::abs(pts[i + 1].obs.alpha - pts[i].obs.alpha),
                                             std::abs(pts[i].obs.alpha - pts[i - 1].obs.alpha));
        int idx = static_cast<int>(i);
        if (std::abs(sm - e.s) < std::abs(s0 - e.s)) idx = static_cast<int>(i) - 1;
        if (std::abs(sp - e.s) < std::abs(pts[idx].s - e.s)) idx = static_cast<int>(i) + 1;
        e.index = idx;
        out.push_back(e);
    }
    return out;
}

} // namespace

void branch_derivatives_and_extrema(BranchRecord& branch) {
    auto& pts = branch.points;
    const int n = static_cast<int>(pts.size());
    if (n < 5) throw InsufficientData("branch derivatives need at least 5 points");
    for (int i = 0; i < n; ++i) {
        const int lo = std::clamp(i - 1, 0, n - 3);
        const int at = i - lo;
        auto d = [&](auto get) {
            return three_point(pts[lo].s, pts[lo + 1].s, pts[lo + 2].s, get(pts[lo]), get(pts[lo + 1]),
                               get(pts[lo + 2]), at);
        };
        pts[i].dc_ds = d([](const BranchPoint& p) { return p.obs.c; });
        pts[i].dE_ds = d([](const BranchPoint& p) { return p.obs.E; });
        pts[i].dP_ds = d([](const BranchPoint& p) { return p.obs.P; });
        const double nan = std::numeric_limits<double>::quiet_NaN();
        pts[i].dE_dc = pts[i].dc_ds != 0.0 ? pts[i].dE_ds / pts[i].dc_ds : nan;
        pts[i].dP_dc = pts[i].dc_ds != 0.0 ? pts[i].dP_ds / pts[i].dc_ds : nan;
        pts[i].speed_max = false;
        pts[i].energy_max = false;
    }
    branch.speed_maxima = local_maxima(pts, [](const BranchPoint& p) { return p.obs.c; });
    branch.energy_maxima = local_maxima(pts, [](const BranchPoint& p) { return p.obs.E; });
    if (!branch.speed_maxima.empty()) pts[branch.speed_maxima.front().index].speed_max = true;
    if (!branch.energy_maxima.empty()) pts[branch.energy_maxima.front().index].energy_max = true;
    branch.derivatives_ready = true;
}

Field physical_x(const Spectral& sp, const Field& w) {
    const double mean = w.mean();
    return (1.0 + mean / sp.grid().h) * sp.nodes() + sp.apply_C(w);
}

Field eta_at(const Spectral& sp, const Field& w, const Field& x) {
    const double m0 = 1.0 + w.mean() / sp.grid().h;
    const Spectrum Cw = sp.forward(sp.apply_C(w));
    const Spectrum B = sp.forward((1.0 + sp.apply_N(w).array()).matrix());
    const Spectrum Wf = sp.forward(w);
    Field eta(x.size());
    for (int j = 0; j < x.size(); ++j) {
        double xi = x[j] / m0;
        for (int it = 0; it < 60; ++it) {
            const double F = m0 * xi + sp.evaluate(Cw, xi) - x[j];
            const double step = F / sp.evaluate(B, xi);
            xi -= step;
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(xi))) break;
        }
        eta[j] = sp.evaluate(Wf, xi);
    }
    return eta;
}

namespace {

double three_point_mid(double cm, double c0, double cp, double fm, double f0, double fp) {
    return three_point(cm, c0, cp, fm, f0, fp, 1);
}

Field three_point_mid(double cm, double c0, double cp, const Field& fm, const Field& f0,
                      const Field& fp) {
    const double hm = c0 - cm, hp = cp - c0;
    return (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (hp * hm * (hp + hm));
}

} // namespace

SensitivityTraces dc_surface_traces(const WaveState& base, const WaveState& minus,
                                    const WaveState& plus, Dealias dealias) {
    const Spectral sp(base.grid, dealias);
    auto on_base = [&](const WaveState& s) {
        if (s.grid == base.grid) return s.w;
        if (s.grid.L != base.grid.L) throw ConfigError("dc_surface_traces: neighbour period differs");
        return Spectral(s.grid, dealias).resample(s.w, sp);
    };
    const Field wm = on_base(minus), wp = on_base(plus);
    SensitivityTraces t;
    t.c = base.c;
    t.c_minus = minus.c;
    t.c_plus = plus.c;
    if (!(t.c_minus < t.c && t.c < t.c_plus))
        throw NotDifferentiable("dc_surface_traces: neighbours do not bracket c");
    const Field x = physical_x(sp, base.w);
    const Field eta_m = eta_at(sp, wm, x);
    const Field eta_p = eta_at(sp, wp, x);
    t.d_c_eta = three_point_mid(t.c_minus, t.c, t.c_plus, eta_m, base.w, eta_p);
    const SurfaceFields sf = surface_fields(sp, base);
    t.d_c_psibar = -base.w - sf.psi_ey.cwiseProduct(t.d_c_eta);
    auto momentum = [&](const Field& w, double c) { return -c * sp.inner(w, sp.apply_N(w)); };
    t.P_minus = momentum(wm, t.c_minus);
    t.P = momentum(base.w, t.c);
    t.P_plus = momentum(wp, t.c_plus);
    t.dP_dc_fd = three_point_mid(t.c_minus, t.c, t.c_plus, t.P_minus, t.P, t.P_plus);
    return t;
}

SensitivityTraces dc_surface_traces(const BranchRecord& branch, int index,
                                    std::optional<double> delta_c) {
    const int n = static_cast<int>(branch.points.size());
    if (index < 0 || index >= n) throw InsufficientData("dc_surface_traces: index out of range");
    const BranchPoint& p = branch.points[index];
    constexpr double kFloor = 1e-3;
    if (delta_c) {
        if (branch.derivatives_ready && std::abs(p.dc_ds) < kFloor)
            throw NotDifferentiable("dc_surface_traces: point is at a turning point in c");
        const Spectral sp(p.wave.grid, branch.dealias);
        NewtonOptions o = branch.tolerances;
        o.check_resolution = false;
        const WaveState minus =
            newton_solve(sp, p.wave.w, lambda_from_speed(p.wave.grid, p.wave.c - *delta_c), o);
        const WaveState plus =
            newton_solve(sp, p.wave.w, lambda_from_speed(p.wave.grid, p.wave.c + *delta_c), o);
        return dc_surface_traces(p.wave, minus, plus, branch.dealias);
    }
    if (index == 0 || index == n - 1)
        throw InsufficientData("dc_surface_traces: index needs two neighbours");
    const BranchPoint& a = branch.points[index - 1];
    const BranchPoint& b = branch.points[index + 1];
    if (branch.derivatives_ready) {
        const bool same = (a.dc_ds > 0) == (p.dc_ds > 0) && (b.dc_ds > 0) == (p.dc_ds > 0);
        if (!same || std::abs(p.dc_ds) < kFloor)
            throw NotDifferentiable("dc_surface_traces: neighbours straddle a turning point");
    }
    const bool rising = b.wave.c > a.wave.c;
    return dc_surface_traces(p.wave, rising ? a.wave : b.wave, rising ? b.wave : a.wave,
                             branch.dealias);
}

} // namespace wavestab
