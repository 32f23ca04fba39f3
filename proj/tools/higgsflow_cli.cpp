// Command-line driver.
//
//   higgsflow run      --preset <name> | --config <file>  [--out dir] [--override k=v ...]
//   higgsflow compare  --manifests <manifest.txt> <manifest.txt> [...]
//   higgsflow profile  --degree N [--rmax R] [--out file.csv]
//
// Exit codes: 0 = success and all checks passed, 1 = usage/configuration/run
// error, 2 = the run (or comparison) completed but a check failed.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "higgsflow/config.hpp"
#include "higgsflow/flow.hpp"
#include "higgsflow/profile.hpp"
#include "higgsflow/runner.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& preset,
            const std::string& out_dir, const std::vector<std::string>& overrides) {
    higgsflow::RunConfig cfg;
    std::vector<std::string> warnings;
    if (!config_path.empty()) {
        cfg = higgsflow::parse_config(config_path, &warnings);
        if (!preset.empty() && preset != cfg.preset) {
            std::cerr << "error: --preset " << preset << " conflicts with config preset "
                      << cfg.preset << "\n";
            return 1;
        }
    } else if (!preset.empty()) {
        cfg = higgsflow::preset_config(preset);
    } else {
        std::cerr << "error: run needs --preset or --config\n";
        return 1;
    }
    if (!overrides.empty()) higgsflow::apply_overrides(cfg, overrides, &warnings);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const higgsflow::RunManifest man = higgsflow::run_preset(cfg);

    std::printf("run %s  (%d^%d sites, eps = %g)  ->  %s\n", cfg.preset.c_str(), cfg.sites,
                cfg.n, cfg.eps, man.directory.c_str());
    for (const auto& c : man.checks)
        std::printf("  [%s] %-26s %-14.6g %s\n", c.pass ? "pass" : "FAIL", c.name.c_str(),
                    c.value, c.note.c_str());
    const bool ok = man.all_pass();
    std::printf("%zu checks, %s\n", man.checks.size(), ok ? "all passed" : "FAILURES above");
    return ok ? 0 : 2;
}

int cmd_compare(const std::vector<std::string>& manifests) {
    const higgsflow::CompareReport rep = higgsflow::compare_runs(manifests);
    std::cout << rep.text;
    return rep.uniformity_pass ? 0 : 2;
}

int cmd_profile(int degree, double r_max, const std::string& out_path) {
    const higgsflow::VortexProfile p = higgsflow::solve_bogomolny(degree, r_max);
    const double disc = higgsflow::profile_max_discrepancy(p);
    const auto half = higgsflow::operator_norm_half_check(p);
    std::printf("degree-%d self-dual vortex profile  (r_max = %g, %d nodes)\n", p.N, p.r_max,
                p.M + 1);
    std::printf("  energy / 2pi        %.12g\n", p.energy / (2.0 * 3.14159265358979323846));
    std::printf("  shooting coeff c    %.12g\n", p.c_shoot);
    std::printf("  max |xi|            %.3g\n", disc);
    std::printf("  half-identity defect %.3g\n", half.max_defect);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write " << out_path << "\n";
            return 1;
        }
        higgsflow::export_profile_csv(p, out);
        std::printf("  table -> %s\n", out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-dual U(1)-Higgs gradient-flow laboratory"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir;
    std::vector<std::string> overrides;
    CLI::App* run = app.add_subcommand("run", "run a configured scenario");
    run->add_option("--config", config_path, "configuration file");
    run->add_option("--preset", preset, "preset name (vacuum, planar_vortex, line_twisted, vortex_ring)");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--override", overrides, "override, key=value (repeatable)");

    std::vector<std::string> manifests;
    CLI::App* cmp = app.add_subcommand("compare", "compare matched runs across resolutions");
    cmp->add_option("--manifests", manifests, "manifest.txt paths")->expected(-2);

    int degree = 1;
    double r_max = 20.0;
    std::string profile_out;
    CLI::App* prof = app.add_subcommand("profile", "solve a radial vortex profile");
    prof->add_option("--degree", degree, "winding number")->check(CLI::Range(1, 8));
    prof->add_option("--rmax", r_max, "radial domain size");
    prof->add_option("--out", profile_out, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, preset, out_dir, overrides);
        if (cmp->parsed()) return cmd_compare(manifests);
        if (prof->parsed()) return cmd_profile(degree, r_max, profile_out);
    } catch (const higgsflow::FlowAbort& e) {
        std::cerr << "flow aborted at t = " << e.time << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
