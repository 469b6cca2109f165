// wavestab: branch, stability, verify and report subcommands.
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "commands.hpp"
#include "wavestab/errors.hpp"

using namespace wavestab;

namespace {

struct Common {
    std::string config;
    std::optional<std::string> out;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON config file; flags override its values");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "seed for the randomized invariants");
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (c.out) cfg.out_dir = *c.out;
    if (c.workers) cfg.workers = cfg.growth.workers = *c.workers;
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solitary water waves: branch continuation and linear stability"};
    app.require_subcommand(1);

    Common common;
    auto* branch = app.add_subcommand("branch", "continue the solitary-wave branch; writes branch.csv and branch.json");
    add_common(branch, common);

    auto* stability = app.add_subcommand("stability", "stability analysis of selected branch points");
    add_common(stability, common);
    std::string branch_file, select = "all";
    stability->add_option("--branch", branch_file, "branch.json (default <out>/branch.json)");
    stability->add_option("--select", select, "all | window | index=i,j | alpha=a,b");

    auto* verify = app.add_subcommand("verify", "run the invariant suite; writes verify.json");
    add_common(verify, common);
    std::string fault;
    verify->add_option("--inject-fault", fault, "test hook")->check(CLI::IsMember({"P_ey_sign"}));

    auto* report = app.add_subcommand("report", "plot-ready CSV series from branch and stability outputs");
    add_common(report, common);
    std::optional<std::string> rep_branch, rep_stab;
    report->add_option("--branch", rep_branch, "branch.json");
    report->add_option("--stability", rep_stab, "stability.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kInputError;
    }

    try {
        RunConfig cfg = resolve(common);
        if (*branch) return cli::cmd_branch(cfg);
        if (*stability) {
            if (branch_file.empty()) branch_file = (std::filesystem::path(cfg.out_dir) / "branch.json").string();
            return cli::cmd_stability(cfg, branch_file, select);
        }
        if (*verify) {
            if (fault == "P_ey_sign") cfg.flip_P_ey_sign = true;
            return cli::cmd_verify(cfg);
        }
        if (*report) return cli::cmd_report(cfg, rep_branch, rep_stab);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kInputError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kInputError;
    }
    return cli::kOk;
}
