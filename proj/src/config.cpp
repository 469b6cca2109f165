#include "wavestab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "wavestab/errors.hpp"

namespace wavestab {

using nlohmann::json;

namespace {

bool power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("config: unknown key '" + where + "." + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

std::string dealias_name(Dealias d) { return d == Dealias::none ? "none" : "two_thirds"; }

Dealias dealias_from(const std::string& s) {
    if (s == "none") return Dealias::none;
    if (s == "two_thirds") return Dealias::two_thirds;
    throw ConfigError("config: dealias must be 'none' or 'two_thirds'");
}

}  // namespace

void RunConfig::validate() const {
    require(grid.h > 0 && grid.g > 0, "h and g must be positive");
    require(power_of_two(grid.M), "grid.M must be a power of two");
    require(grid.L >= 40.0 * grid.h, "grid.L must be at least 40 h");
    require(newton.tol > 0 && newton.tail_tol > 0 && newton.spectral_tol > 0 && newton.gmres_tol > 0,
            "solver tolerances must be positive");
    require(newton.max_iterations > 0, "newton.max_iterations must be positive");
    require(start_froude > 1.0, "start_froude must exceed 1");
    require(target.alpha > 0.0 && target.alpha < 0.8332, "target.alpha must lie in (0, 0.8332)");
    require(!target.omega || (*target.omega > 0 && *target.omega < 1), "target.omega must lie in (0, 1)");
    require(step.ds_min > 0 && step.ds_initial >= step.ds_min && step.ds_max >= step.ds_initial,
            "step sizes must satisfy 0 < ds_min <= ds_initial <= ds_max");
    require(step.ds_fine > 0 && step.growth > 1.0, "ds_fine must be positive and growth above 1");
    require(power_of_two(step.max_M) && step.max_M >= grid.M, "step.max_M must be a power of two >= grid.M");
    require(stability_grid.ell > 0, "stability.ell must be positive");
    require(power_of_two(stability_grid.M_min) && power_of_two(stability_grid.M_max) &&
                stability_grid.M_min <= stability_grid.M_max,
            "stability.M_min/M_max must be powers of two with M_min <= M_max");
    require(stability_grid.spectral_tol > 0 && stability_grid.newton_tol > 0, "stability tolerances must be positive");
    require(growth.lambda_min > 0 && growth.lambda_max > growth.lambda_min && growth.samples >= 2,
            "growth lambda range must be increasing with at least two samples");
    require(growth.rel_tol > 0 && growth.max_bisections > 0, "growth tolerances must be positive");
    for (double l : spectrum_lambdas) require(l > 0, "spectrum_lambdas must be positive");
    require(k_lambda_count >= 3, "k_lambda_count must be at least 3");
    require(dc_floor > 0, "dc_floor must be positive");
    require(workers >= 1, "workers must be at least 1");
}

json to_json(const RunConfig& c) {
    json j;
    j["grid"] = {{"L", c.grid.L}, {"M", c.grid.M}, {"h", c.grid.h}, {"g", c.grid.g}};
    j["newton"] = {{"tol", c.newton.tol},
                   {"max_iterations", c.newton.max_iterations},
                   {"tail_tol", c.newton.tail_tol},
                   {"spectral_tol", c.newton.spectral_tol},
                   {"gmres_tol", c.newton.gmres_tol}};
    j["dealias"] = dealias_name(c.dealias);
    j["start_froude"] = c.start_froude;
    j["target"] = {{"alpha", c.target.alpha},
                   {"omega", c.target.omega ? json(*c.target.omega) : json(nullptr)},
                   {"omega_alt", c.target.omega_alt}};
    j["step"] = {{"ds_initial", c.step.ds_initial}, {"ds_min", c.step.ds_min},
                 {"ds_max", c.step.ds_max},         {"fine_alpha", c.step.fine_alpha},
                 {"ds_fine", c.step.ds_fine},       {"growth", c.step.growth},
                 {"good_iterations", c.step.good_iterations}, {"max_newton", c.step.max_newton},
                 {"max_points", c.step.max_points}, {"max_M", c.step.max_M}};
    j["stability"] = {{"kind", c.stability_grid.kind == OperatorGrid::Kind::line ? "line" : "periodic"},
                      {"ell", c.stability_grid.ell},
                      {"period", c.stability_grid.period},
                      {"M_min", c.stability_grid.M_min},
                      {"M_max", c.stability_grid.M_max},
                      {"spectral_tol", c.stability_grid.spectral_tol},
                      {"newton_tol", c.stability_grid.newton_tol}};
    j["growth"] = {{"lambda_min", c.growth.lambda_min},     {"lambda_max", c.growth.lambda_max},
                   {"samples", c.growth.samples},           {"refinements", c.growth.refinements},
                   {"max_bisections", c.growth.max_bisections}, {"rel_tol", c.growth.rel_tol}};
    j["spectrum_lambdas"] = c.spectrum_lambdas;
    j["k_lambda_count"] = c.k_lambda_count;
    j["dc_floor"] = c.dc_floor;
    j["out_dir"] = c.out_dir;
    j["workers"] = c.workers;
    j["seed"] = c.seed;
    j["flip_P_ey_sign"] = c.flip_P_ey_sign;
    return j;
}

RunConfig config_from_json(const json& j, RunConfig c) {
    only_keys(j, "", {"grid", "newton", "dealias", "start_froude", "target", "step", "stability", "growth",
                      "spectrum_lambdas", "k_lambda_count", "dc_floor", "out_dir", "workers", "seed", "flip_P_ey_sign"});
    if (j.contains("grid")) {
        const json& g = j["grid"];
        only_keys(g, "grid", {"L", "M", "h", "g"});
        read(g, "L", c.grid.L);
        read(g, "M", c.grid.M);
        read(g, "h", c.grid.h);
        read(g, "g", c.grid.g);
    }
    if (j.contains("newton")) {
        const json& n = j["newton"];
        only_keys(n, "newton", {"tol", "max_iterations", "tail_tol", "spectral_tol", "gmres_tol"});
        read(n, "tol", c.newton.tol);
        read(n, "max_iterations", c.newton.max_iterations);
        read(n, "tail_tol", c.newton.tail_tol);
        read(n, "spectral_tol", c.newton.spectral_tol);
        read(n, "gmres_tol", c.newton.gmres_tol);
    }
    if (j.contains("dealias")) c.dealias = dealias_from(j["dealias"].get<std::string>());
    read(j, "start_froude", c.start_froude);
    if (j.contains("target")) {
        const json& t = j["target"];
        only_keys(t, "target", {"alpha", "omega", "omega_alt"});
        read(t, "alpha", c.target.alpha);
        if (t.contains("omega")) {
            if (t["omega"].is_null()) c.target.omega.reset();
            else c.target.omega = t["omega"].get<double>();
        }
        read(t, "omega_alt", c.target.omega_alt);
    }
    if (j.contains("step")) {
        const json& s = j["step"];
        only_keys(s, "step", {"ds_initial", "ds_min", "ds_max", "fine_alpha", "ds_fine", "growth",
                              "good_iterations", "max_newton", "max_points", "max_M"});
        read(s, "ds_initial", c.step.ds_initial);
        read(s, "ds_min", c.step.ds_min);
        read(s, "ds_max", c.step.ds_max);
        read(s, "fine_alpha", c.step.fine_alpha);
        read(s, "ds_fine", c.step.ds_fine);
        read(s, "growth", c.step.growth);
        read(s, "good_iterations", c.step.good_iterations);
        read(s, "max_newton", c.step.max_newton);
        read(s, "max_points", c.step.max_points);
        read(s, "max_M", c.step.max_M);
    }
    if (j.contains("stability")) {
        const json& s = j["stability"];
        only_keys(s, "stability", {"kind", "ell", "period", "M_min", "M_max", "spectral_tol", "newton_tol"});
        if (s.contains("kind")) {
            const std::string k = s["kind"].get<std::string>();
            if (k == "line") c.stability_grid.kind = OperatorGrid::Kind::line;
            else if (k == "periodic") c.stability_grid.kind = OperatorGrid::Kind::periodic;
            else throw ConfigError("config: stability.kind must be 'line' or 'periodic'");
        }
        read(s, "ell", c.stability_grid.ell);
        read(s, "period", c.stability_grid.period);
        read(s, "M_min", c.stability_grid.M_min);
        read(s, "M_max", c.stability_grid.M_max);
        read(s, "spectral_tol", c.stability_grid.spectral_tol);
        read(s, "newton_tol", c.stability_grid.newton_tol);
    }
    if (j.contains("growth")) {
        const json& g = j["growth"];
        only_keys(g, "growth", {"lambda_min", "lambda_max", "samples", "refinements", "max_bisections", "rel_tol"});
        read(g, "lambda_min", c.growth.lambda_min);
        read(g, "lambda_max", c.growth.lambda_max);
        read(g, "samples", c.growth.samples);
        read(g, "refinements", c.growth.refinements);
        read(g, "max_bisections", c.growth.max_bisections);
        read(g, "rel_tol", c.growth.rel_tol);
    }
    read(j, "spectrum_lambdas", c.spectrum_lambdas);
    read(j, "k_lambda_count", c.k_lambda_count);
    read(j, "dc_floor", c.dc_floor);
    read(j, "out_dir", c.out_dir);
    read(j, "workers", c.workers);
    read(j, "seed", c.seed);
    read(j, "flip_P_ey_sign", c.flip_P_ey_sign);
    c.growth.workers = c.workers;
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

}  // namespace wavestab
