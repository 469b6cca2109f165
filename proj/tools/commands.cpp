#include "commands.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wavestab/errors.hpp"
#include "wavestab/linalg.hpp"
#include "wavestab/serialize.hpp"
#include "wavestab/verify.hpp"

namespace wavestab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string out_path(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + " is not valid JSON: " + e.what());
    }
}

BranchRecord load_branch(const std::string& path) { return branch_from_json(read_json_file(path)); }

json provenance(const BranchRecord& b, const BranchPoint& p) {
    const GridSpec& g = p.wave.grid;
    return {{"L", g.L},
            {"M", g.M},
            {"h", g.h},
            {"g", g.g},
            {"dealias", b.dealias == Dealias::none ? "none" : "two_thirds"},
            {"newton_tol", b.tolerances.tol},
            {"tail_tol", b.tolerances.tail_tol},
            {"spectral_tol", b.tolerances.spectral_tol}};
}

std::string csv_header(const std::vector<std::string>& cols) {
    std::string s = std::string("# wavestab report v") + kArtifactVersion + "\n";
    for (size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
    return s + "\n";
}

double json_num(const json& j) { return j.is_number() ? j.get<double>() : NAN; }

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

Manifest::Manifest(std::string command, const RunConfig& cfg)
    : command_(std::move(command)), cfg_(cfg), started_(now_seconds()) {}

void Manifest::input(const std::string& path) { inputs_.push_back(path); }
void Manifest::output(const std::string& path) { outputs_.push_back(path); }

void Manifest::finish(int exit_code) {
    const std::string path = out_path(cfg_, "manifest.json");
    json m;
    if (fs::exists(path)) {
        try {
            m = read_json_file(path);
        } catch (const ConfigError&) {
            m = json::object();
        }
    }
    if (!m.is_object() || !m.contains("commands") || !m["commands"].is_object()) m = json::object();
    if (!m.contains("commands")) m["commands"] = json::object();
    if (!m.contains("files") || !m["files"].is_object()) m["files"] = json::object();
    m["artifact_version"] = kArtifactVersion;
    m["config"] = to_json(cfg_);

    auto digests = [&](const std::vector<std::string>& paths) {
        json a = json::array();
        for (const std::string& p : paths) {
            const std::string d = sha256_file(p);
            a.push_back({{"path", p}, {"sha256", d.empty() ? json(nullptr) : json(d)}});
            if (!d.empty()) m["files"][p] = d;
        }
        return a;
    };
    m["commands"][command_] = {{"seconds", now_seconds() - started_},
                               {"exit_code", exit_code},
                               {"inputs", digests(inputs_)},
                               {"outputs", digests(outputs_)}};
    write_text_file(path, m.dump(2) + "\n");
}

std::vector<int> parse_selection(const std::string& expr, const BranchRecord& b) {
    const int n = static_cast<int>(b.points.size());
    std::vector<int> out;
    auto list = [](const std::string& s) {
        std::vector<double> v;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                size_t used = 0;
                v.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("selection: cannot parse '" + item + "'");
            }
        }
        if (v.empty()) throw ConfigError("selection: empty list");
        return v;
    };
    if (expr == "all") {
        for (int i = 0; i < n; ++i) out.push_back(i);
    } else if (expr == "window") {
        const auto e = b.first_energy_max();
        const auto c = b.first_speed_max();
        if (!e || !c) throw ConfigError("selection: window needs both extrema flagged in the branch");
        for (int i = 0; i < n; ++i) {
            const double a = b.points[i].obs.alpha;
            if (a > e->alpha && a < c->alpha) out.push_back(i);
        }
    } else if (expr.rfind("index=", 0) == 0) {
        for (double x : list(expr.substr(6))) {
            const int i = static_cast<int>(x);
            if (i != x || i < 0 || i >= n) throw ConfigError("selection: index out of range");
            out.push_back(i);
        }
    } else if (expr.rfind("alpha=", 0) == 0) {
        if (n == 0) throw ConfigError("selection: branch is empty");
        for (double a : list(expr.substr(6))) out.push_back(b.nearest_alpha(a));
    } else {
        throw ConfigError("selection: expected all, window, index=..., or alpha=...");
    }
    return out;
}

json analyze_point(const BranchRecord& branch, int index, const RunConfig& cfg, bool& failed) {
    const BranchPoint& p = branch.points.at(index);
    json j = {{"index", index},
              {"alpha", p.obs.alpha},
              {"c", p.obs.c},
              {"omega", p.obs.omega},
              {"omega_alt", p.obs.omega_alt},
              {"provenance", provenance(branch, p)}};
    failed = false;
    try {
        const PreparedWave pw = prepare_stability_wave(p.wave, branch.dealias, cfg.stability_grid);
        SurfaceFields sf = surface_fields(pw.grid, pw.wave);
        if (cfg.flip_P_ey_sign) sf.P_ey = -sf.P_ey;
        SpectrumOptions so;
        for (double l : cfg.spectrum_lambdas) so.lambdas.push_back(l * sf.c / pw.grid.h());
        StabilityReport rep = spectrum_report(pw.grid, sf, so);
        rep.spectral_ratio = pw.wave.spectral_ratio;
        rep.resolved = pw.resolved;
        if (!pw.resolved) rep.failures.push_back("line-grid wave above spectral_tol at M_max");

        if (std::abs(p.dc_ds) >= cfg.dc_floor && std::isfinite(p.dE_dc)) {
            try {
                rep.moving_kernel = track_k_lambda(pw.grid, sf, p.dE_dc,
                                                   default_k_lambdas(sf.c, pw.grid.h(), cfg.k_lambda_count));
            } catch (const Error& e) {
                rep.failures.push_back(std::string("moving kernel: ") + e.what());
            }
        }
        GrowthSearchOptions go = cfg.growth;
        go.workers = 1;
        rep.growing_mode = find_growing_mode(pw.grid, sf, go);
        rep.growth_search_done = true;
        j["report"] = report_to_json(rep);
        failed = !rep.failures.empty();
    } catch (const Error& e) {
        j["error"] = e.what();
        failed = true;
    }
    j["failed"] = failed;
    return j;
}

int cmd_branch(const RunConfig& cfg) {
    Manifest man("branch", cfg);
    int code = kOk;
    BranchRecord b;
    try {
        const Spectral sp(cfg.grid, cfg.dealias);
        const WaveState start = initial_wave(sp, cfg.start_froude, cfg.newton);
        b = continue_branch(start, cfg.target, cfg.step, cfg.newton, cfg.dealias);
    } catch (const ContinuationStalled& e) {
        std::cerr << "branch: " << e.what() << " (partial output written)\n";
        b = e.partial;
        code = kStalled;
    }
    if (b.points.size() >= 3) branch_derivatives_and_extrema(b);
    std::ostringstream csv;
    write_branch_csv(csv, b);
    const std::string csv_path = out_path(cfg, "branch.csv"), json_path = out_path(cfg, "branch.json");
    write_text_file(csv_path, csv.str());
    write_text_file(json_path, branch_to_json(b).dump() + "\n");
    man.output(csv_path);
    man.output(json_path);
    man.finish(code);
    std::cout << "branch: " << b.points.size() << " points";
    if (auto e = b.first_energy_max()) std::cout << ", energy max at alpha " << e->alpha;
    if (auto c = b.first_speed_max()) std::cout << ", speed max at alpha " << c->alpha;
    std::cout << "\n";
    return code;
}

int cmd_stability(const RunConfig& cfg, const std::string& branch_path, const std::string& selection) {
    Manifest man("stability", cfg);
    man.input(branch_path);
    BranchRecord b = load_branch(branch_path);
    if (!b.derivatives_ready && b.points.size() >= 3) branch_derivatives_and_extrema(b);
    const std::vector<int> idx = parse_selection(selection, b);

    std::vector<json> results(idx.size());
    std::vector<char> failed(idx.size(), 0);
    parallel_for(static_cast<int>(idx.size()), cfg.workers, [&](int k) {
        bool f = false;
        results[k] = analyze_point(b, idx[k], cfg, f);
        failed[k] = f;
    });
    int nfail = 0;
    json points = json::array();
    for (size_t k = 0; k < idx.size(); ++k) {
        points.push_back(std::move(results[k]));
        nfail += failed[k];
    }
    json out = {{"artifact_version", kArtifactVersion},
                {"branch", {{"path", branch_path}, {"sha256", sha256_file(branch_path)}}},
                {"selection", selection},
                {"stability_grid", to_json(cfg)["stability"]},
                {"growth", to_json(cfg)["growth"]},
                {"points", points},
                {"failed_points", nfail}};
    const std::string path = out_path(cfg, "stability.json");
    write_text_file(path, out.dump(1) + "\n");
    man.output(path);
    const int code = nfail ? kPointFailed : kOk;
    man.finish(code);
    std::cout << "stability: " << idx.size() << " points, " << nfail << " failed\n";
    return code;
}

int cmd_verify(const RunConfig& cfg) {
    Manifest man("verify", cfg);
    const auto results = run_invariant_suite(cfg);
    const json j = invariants_to_json(results);
    const std::string path = out_path(cfg, "verify.json");
    write_text_file(path, j.dump(2) + "\n");
    man.output(path);
    for (const InvariantResult& r : results)
        if (!r.passed) std::cout << "FAIL " << r.name << ": " << r.value << " (threshold " << r.threshold << ") " << r.detail << "\n";
    const int failed = j["failed"].get<int>();
    std::cout << "verify: " << results.size() - failed << "/" << results.size() << " invariants passed\n";
    const int code = failed ? kVerifyFailed : kOk;
    man.finish(code);
    return code;
}

int cmd_report(const RunConfig& cfg, const std::optional<std::string>& branch_path,
               const std::optional<std::string>& stability_path) {
    if (!branch_path && !stability_path) throw ConfigError("report: give --branch and/or --stability");
    Manifest man("report", cfg);
    auto emit = [&](const std::string& name, const std::string& text) {
        const std::string p = out_path(cfg, name);
        write_text_file(p, text);
        man.output(p);
    };
    if (branch_path) {
        man.input(*branch_path);
        const BranchRecord b = load_branch(*branch_path);
        const std::vector<std::string> prov = {"L", "M", "newton_tol"};
        auto cols = [&](std::vector<std::string> v) {
            v.insert(v.end(), prov.begin(), prov.end());
            return csv_header(v);
        };
        std::string c = cols({"alpha", "c", "speed_max"});
        std::string e = cols({"alpha", "E", "P", "energy_max"});
        std::string w = cols({"alpha", "omega", "omega_alt"});
        for (const BranchPoint& p : b.points) {
            const std::string tail =
                "," + fmt17(p.wave.grid.L) + "," + std::to_string(p.wave.grid.M) + "," + fmt17(b.tolerances.tol) + "\n";
            const std::string a = fmt17(p.obs.alpha);
            c += a + "," + fmt17(p.obs.c) + "," + std::to_string(int(p.speed_max)) + tail;
            e += a + "," + fmt17(p.obs.E) + "," + fmt17(p.obs.P) + "," + std::to_string(int(p.energy_max)) + tail;
            w += a + "," + fmt17(p.obs.omega) + "," + fmt17(p.obs.omega_alt) + tail;
        }
        emit("alpha_c.csv", c);
        emit("alpha_E.csv", e);
        emit("alpha_omega.csv", w);
    }
    if (stability_path) {
        man.input(*stability_path);
        const json s = read_json_file(*stability_path);
        if (!s.contains("points") || !s["points"].is_array()) throw ConfigError("report: stability file has no points");
        std::string ls = csv_header({"alpha", "omega", "lambda_star", "grid_size", "ell"});
        std::string lk = csv_header({"alpha", "lambda", "k", "k_over_lambda2", "grid_size", "ell"});
        for (const json& p : s["points"]) {
            if (!p.contains("report")) continue;
            const json& r = p["report"];
            const std::string a = fmt17(json_num(p.value("alpha", json())));
            const std::string g = "," + std::to_string(r["grid"].value("size", 0)) + "," + fmt17(json_num(r["grid"]["ell"])) + "\n";
            if (r.value("growth_search_done", false)) {
                const json& l = r["lambda_star"];
                ls += a + "," + fmt17(json_num(p.value("omega", json()))) + "," + (l.is_number() ? fmt17(l.get<double>()) : "") + g;
            }
            if (r["moving_kernel"].is_object())
                for (const json& k : r["moving_kernel"]["samples"])
                    lk += a + "," + fmt17(json_num(k["lambda"])) + "," + fmt17(json_num(k["k"])) + "," +
                          fmt17(json_num(k["k_over_lambda2"])) + g;
        }
        emit("alpha_lambda_star.csv", ls);
        emit("lambda_k.csv", lk);
    }
    man.finish(kOk);
    return kOk;
}

}  // namespace wavestab::cli
