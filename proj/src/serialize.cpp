#include "wavestab/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "wavestab/errors.hpp"

namespace wavestab {

using nlohmann::json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> branch_csv_columns() {
    return {"index",   "s",         "lambda_p",      "c",          "F",          "q_c",
            "omega",   "omega_alt", "mu",            "alpha",      "E",          "P",
            "kinetic", "potential", "delta0",        "residual_norm", "newton_iterations",
            "L",       "M",         "h",             "g",          "dealias",    "newton_tol",
            "tail_tol", "spectral_tol", "tail_ratio", "spectral_ratio", "dc_ds", "dE_ds",
            "dP_ds",   "dE_dc",     "dP_dc",         "speed_max",  "energy_max", "tail_limited",
            "under_resolved", "near_singular"};
}

void write_branch_csv(std::ostream& os, const BranchRecord& b) {
    os << "# wavestab branch.csv v" << kBranchCsvVersion << "\n";
    const auto cols = branch_csv_columns();
    for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    const char* dealias = b.dealias == Dealias::none ? "none" : "two_thirds";
    for (size_t i = 0; i < b.points.size(); ++i) {
        const BranchPoint& p = b.points[i];
        const Observables& o = p.obs;
        const GridSpec& g = p.wave.grid;
        os << i << ',' << fmt17(p.s) << ',' << fmt17(p.wave.lambda_p) << ',' << fmt17(o.c) << ','
           << fmt17(o.F) << ',' << fmt17(o.q_c) << ',' << fmt17(o.omega) << ',' << fmt17(o.omega_alt) << ','
           << fmt17(o.mu) << ',' << fmt17(o.alpha) << ',' << fmt17(o.E) << ',' << fmt17(o.P) << ','
           << fmt17(o.kinetic) << ',' << fmt17(o.potential) << ',' << fmt17(o.delta0) << ','
           << fmt17(p.wave.residual_norm) << ',' << p.wave.newton_iterations << ',' << fmt17(g.L) << ','
           << g.M << ',' << fmt17(g.h) << ',' << fmt17(g.g) << ',' << dealias << ','
           << fmt17(b.tolerances.tol) << ',' << fmt17(b.tolerances.tail_tol) << ','
           << fmt17(b.tolerances.spectral_tol) << ',' << fmt17(p.resolution.tail_ratio) << ','
           << fmt17(p.resolution.spectral_ratio) << ',' << fmt17(p.dc_ds) << ',' << fmt17(p.dE_ds) << ','
           << fmt17(p.dP_ds) << ',' << fmt17(p.dE_dc) << ',' << fmt17(p.dP_dc) << ',' << int(p.speed_max) << ','
           << int(p.energy_max) << ',' << int(p.tail_limited) << ',' << int(p.under_resolved) << ','
           << int(o.near_singular) << "\n";
    }
}

namespace {

// JSON has no NaN; map non-finite values to null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double get_num(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("branch json: missing '") + key + "'");
    const json& v = j.at(key);
    if (v.is_null()) return std::nan("");
    if (!v.is_number()) throw ConfigError(std::string("branch json: '") + key + "' is not a number");
    return v.get<double>();
}

json field(const Field& f) {
    json a = json::array();
    for (Eigen::Index i = 0; i < f.size(); ++i) a.push_back(num(f[i]));
    return a;
}

json obs_json(const Observables& o) {
    return {{"c", num(o.c)},           {"F", num(o.F)},
            {"q_c", num(o.q_c)},       {"omega", num(o.omega)},
            {"omega_alt", num(o.omega_alt)}, {"mu", num(o.mu)},
            {"alpha", num(o.alpha)},   {"E", num(o.E)},
            {"P", num(o.P)},           {"kinetic", num(o.kinetic)},
            {"potential", num(o.potential)}, {"delta0", num(o.delta0)},
            {"near_singular", o.near_singular}};
}

Observables obs_from(const json& j) {
    Observables o;
    o.c = get_num(j, "c");
    o.F = get_num(j, "F");
    o.q_c = get_num(j, "q_c");
    o.omega = get_num(j, "omega");
    o.omega_alt = get_num(j, "omega_alt");
    o.mu = get_num(j, "mu");
    o.alpha = get_num(j, "alpha");
    o.E = get_num(j, "E");
    o.P = get_num(j, "P");
    o.kinetic = get_num(j, "kinetic");
    o.potential = get_num(j, "potential");
    o.delta0 = get_num(j, "delta0");
    o.near_singular = j.value("near_singular", false);
    return o;
}

Extremum extremum_from(const json& j) {
    Extremum e;
    e.index = j.at("index").get<int>();
    e.s = get_num(j, "s");
    e.value = get_num(j, "value");
    e.alpha = get_num(j, "alpha");
    e.omega = get_num(j, "omega");
    e.omega_alt = get_num(j, "omega_alt");
    e.alpha_uncertainty = get_num(j, "alpha_uncertainty");
    return e;
}

}  // namespace

json extremum_to_json(const Extremum& e) {
    return {{"index", e.index},         {"s", num(e.s)},
            {"value", num(e.value)},    {"alpha", num(e.alpha)},
            {"omega", num(e.omega)},    {"omega_alt", num(e.omega_alt)},
            {"alpha_uncertainty", num(e.alpha_uncertainty)}};
}

json branch_to_json(const BranchRecord& b) {
    json j;
    j["format"] = "wavestab-branch";
    j["version"] = kArtifactVersion;
    j["dealias"] = b.dealias == Dealias::none ? "none" : "two_thirds";
    j["tolerances"] = {{"tol", b.tolerances.tol},
                       {"max_iterations", b.tolerances.max_iterations},
                       {"tail_tol", b.tolerances.tail_tol},
                       {"spectral_tol", b.tolerances.spectral_tol},
                       {"check_resolution", b.tolerances.check_resolution},
                       {"gmres_tol", b.tolerances.gmres_tol}};
    j["derivatives_ready"] = b.derivatives_ready;
    json pts = json::array();
    for (const BranchPoint& p : b.points) {
        const Spectral sp(p.wave.grid, Dealias::none);
        const Eigen::VectorXd a = sp.cosine_coefficients(p.wave.w);
        const double top = a.cwiseAbs().maxCoeff();
        Eigen::Index keep = a.size();
        while (keep > 1 && std::abs(a[keep - 1]) <= 1e-17 * top) --keep;
        json q;
        q["grid"] = {{"L", p.wave.grid.L}, {"M", p.wave.grid.M}, {"h", p.wave.grid.h}, {"g", p.wave.grid.g}};
        q["lambda_p"] = p.wave.lambda_p;
        q["c"] = p.wave.c;
        q["residual_norm"] = num(p.wave.residual_norm);
        q["newton_iterations"] = p.wave.newton_iterations;
        q["w_cosine"] = field(a.head(keep));
        q["obs"] = obs_json(p.obs);
        q["resolution"] = {{"tail_ratio", num(p.resolution.tail_ratio)},
                           {"spectral_ratio", num(p.resolution.spectral_ratio)},
                           {"tail_ok", p.resolution.tail_ok},
                           {"spectral_ok", p.resolution.spectral_ok}};
        q["s"] = p.s;
        q["dc_ds"] = num(p.dc_ds);
        q["dE_ds"] = num(p.dE_ds);
        q["dP_ds"] = num(p.dP_ds);
        q["dE_dc"] = num(p.dE_dc);
        q["dP_dc"] = num(p.dP_dc);
        q["speed_max"] = p.speed_max;
        q["energy_max"] = p.energy_max;
        q["tail_limited"] = p.tail_limited;
        q["under_resolved"] = p.under_resolved;
        pts.push_back(std::move(q));
    }
    j["points"] = std::move(pts);
    json sm = json::array(), em = json::array();
    for (const Extremum& e : b.speed_maxima) sm.push_back(extremum_to_json(e));
    for (const Extremum& e : b.energy_maxima) em.push_back(extremum_to_json(e));
    j["speed_maxima"] = std::move(sm);
    j["energy_maxima"] = std::move(em);
    return j;
}

BranchRecord branch_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != "wavestab-branch")
            throw ConfigError("branch json: not a wavestab branch file");
        BranchRecord b;
        b.dealias = j.at("dealias").get<std::string>() == "none" ? Dealias::none : Dealias::two_thirds;
        const json& t = j.at("tolerances");
        b.tolerances.tol = t.at("tol").get<double>();
        b.tolerances.max_iterations = t.at("max_iterations").get<int>();
        b.tolerances.tail_tol = t.at("tail_tol").get<double>();
        b.tolerances.spectral_tol = t.at("spectral_tol").get<double>();
        b.tolerances.check_resolution = t.at("check_resolution").get<bool>();
        b.tolerances.gmres_tol = t.at("gmres_tol").get<double>();
        b.derivatives_ready = j.at("derivatives_ready").get<bool>();
        for (const json& q : j.at("points")) {
            BranchPoint p;
            const json& g = q.at("grid");
            p.wave.grid.L = g.at("L").get<double>();
            p.wave.grid.M = g.at("M").get<int>();
            p.wave.grid.h = g.at("h").get<double>();
            p.wave.grid.g = g.at("g").get<double>();
            p.wave.grid.validate();
            p.wave.lambda_p = q.at("lambda_p").get<double>();
            p.wave.c = q.at("c").get<double>();
            p.wave.residual_norm = get_num(q, "residual_norm");
            p.wave.newton_iterations = q.at("newton_iterations").get<int>();
            const json& a = q.at("w_cosine");
            if (!a.is_array() || a.empty() || static_cast<int>(a.size()) > p.wave.grid.M / 2 + 1)
                throw ConfigError("branch json: bad w_cosine length");
            Eigen::VectorXd coef(a.size());
            for (size_t i = 0; i < a.size(); ++i) coef[i] = a[i].get<double>();
            p.wave.w = Spectral(p.wave.grid, Dealias::none).from_cosine_coefficients(coef);
            p.obs = obs_from(q.at("obs"));
            const json& r = q.at("resolution");
            p.resolution.tail_ratio = get_num(r, "tail_ratio");
            p.resolution.spectral_ratio = get_num(r, "spectral_ratio");
            p.resolution.tail_ok = r.at("tail_ok").get<bool>();
            p.resolution.spectral_ok = r.at("spectral_ok").get<bool>();
            p.s = get_num(q, "s");
            p.dc_ds = get_num(q, "dc_ds");
            p.dE_ds = get_num(q, "dE_ds");
            p.dP_ds = get_num(q, "dP_ds");
            p.dE_dc = get_num(q, "dE_dc");
            p.dP_dc = get_num(q, "dP_dc");
            p.speed_max = q.at("speed_max").get<bool>();
            p.energy_max = q.at("energy_max").get<bool>();
            p.tail_limited = q.at("tail_limited").get<bool>();
            p.under_resolved = q.at("under_resolved").get<bool>();
            b.points.push_back(std::move(p));
        }
        for (const json& e : j.at("speed_maxima")) b.speed_maxima.push_back(extremum_from(e));
        for (const json& e : j.at("energy_maxima")) b.energy_maxima.push_back(extremum_from(e));
        return b;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("branch json: ") + e.what());
    } catch (const InvalidField& e) {
        throw ConfigError(std::string("branch json: ") + e.what());
    }
}

json moving_kernel_to_json(const MovingKernel& m) {
    json s = json::array();
    for (const KSample& k : m.samples)
        s.push_back({{"lambda", num(k.lambda)}, {"k", num(k.k)}, {"k_over_lambda2", num(k.k / (k.lambda * k.lambda))},
                     {"overlap", num(k.overlap)}});
    return {{"samples", s},
            {"complex_from", m.complex_from ? json(*m.complex_from) : json(nullptr)},
            {"extrapolated", num(m.extrapolated)},
            {"error_bar", num(m.error_bar)},
            {"k_over_lambda_min", num(m.k_over_lambda_min)},
            {"dE_dc", num(m.dE_dc)},
            {"psi_ex_norm2", num(m.psi_ex_norm2)},
            {"rhs", num(m.rhs)},
            {"relative_error", num(m.relative_error())}};
}

json growing_mode_to_json(const GrowingMode& g) {
    return {{"lambda_star", num(g.lambda_star)},
            {"crossings", g.crossings},
            {"kernel_residual", num(g.kernel_residual)},
            {"equation_residual", num(g.equation_residual)},
            {"xi", field(g.xi)},
            {"physical_x", field(g.physical_x)},
            {"f", field(g.f)},
            {"eta", field(g.eta)},
            {"P_trace", field(g.P_trace)}};
}

json report_to_json(const StabilityReport& r) {
    json j;
    j["grid"] = {{"kind", r.grid_kind}, {"size", r.grid_size}, {"ell", r.ell},
                 {"spectral_ratio", num(r.spectral_ratio)}, {"resolved", r.resolved}};
    j["alpha"] = num(r.alpha);
    j["c"] = num(r.c);
    j["a0"] = {{"eigenvalues_lowest", field(r.a0_eigenvalues.head(std::min<Eigen::Index>(16, r.a0_eigenvalues.size())))},
               {"n_minus", r.n_minus},
               {"kernel_eigenvalue", num(r.kernel_eigenvalue)},
               {"kernel_residual", num(r.kernel_residual)},
               {"translation_residual", num(r.translation_residual)},
               {"asymmetry", num(r.a0_asymmetry)},
               {"delta0", num(r.delta0)},
               {"smallest_singular", {num(r.smallest_singular[0]), num(r.smallest_singular[1])}},
               {"edge_potential_gap", num(r.edge_potential_gap)}};
    json sp = json::array();
    for (const LambdaSpectrum& l : r.spectra) {
        json re = json::array(), im = json::array();
        for (const auto& z : l.eigenvalues) {
            re.push_back(num(z.real()));
            im.push_back(num(z.imag()));
        }
        sp.push_back({{"lambda", num(l.lambda)}, {"n_omega", l.n_omega}, {"M_b", num(l.M_b)},
                      {"det_sign", l.det_sign}, {"min_real", num(l.min_real)}, {"failed", l.failed},
                      {"message", l.message}, {"eigenvalues_re", re}, {"eigenvalues_im", im}});
    }
    j["spectra"] = sp;
    j["moving_kernel"] = r.moving_kernel ? moving_kernel_to_json(*r.moving_kernel) : json(nullptr);
    j["growth_search_done"] = r.growth_search_done;
    j["growing_mode"] = r.growing_mode ? growing_mode_to_json(*r.growing_mode) : json(nullptr);
    j["lambda_star"] = r.growing_mode ? json(r.growing_mode->lambda_star) : json(nullptr);
    j["failures"] = r.failures;
    return j;
}

json transition_to_json(const TransitionReport& t) {
    json rows = json::array();
    for (const TransitionRow& r : t.rows)
        rows.push_back({{"alpha", num(r.alpha)}, {"omega", num(r.omega)}, {"omega_alt", num(r.omega_alt)},
                        {"lambda_star", r.lambda_star ? json(*r.lambda_star) : json(nullptr)},
                        {"grid_size", r.grid_size}});
    return {{"energy_max_alpha", num(t.energy_max_alpha)},
            {"energy_max_uncertainty", num(t.energy_max_uncertainty)},
            {"speed_max_alpha", num(t.speed_max_alpha)},
            {"rows", rows},
            {"monotone", t.monotone},
            {"min_max_ratio", num(t.min_max_ratio)},
            {"zero_alpha", num(t.zero_alpha)},
            {"zero_alpha_error", num(t.zero_alpha_error)}};
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

}  // namespace wavestab
