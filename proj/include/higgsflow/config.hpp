#pragma once

// Run configuration: scenario presets, dotted key=value parsing with strict
// unknown-key rejection, constraint validation, and a canonical echo used
// for manifests and reproducibility checks.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace higgsflow {

struct RunConfig {
    // lattice
    int n = 3;
    int sites = 32;       // sites per axis
    double extent = 6.0;  // physical length per axis
    int q = 0;            // bundle twist on the (0,1) plane

    // flow
    double eps = 0.5;
    double dt_factor = 0.2;
    double t_end = 1.0;
    double sample_every = 0.05;
    std::string integrator = "rk4";  // rk4 | euler

    // scenario
    std::string preset = "vacuum";  // vacuum | planar_vortex | line_twisted | vortex_ring
    int degree = 0;
    double radius = 0.0;            // initial ring radius (vortex_ring only)
    bool allow_tight_ring = false;  // relax the 6ε comfort floor to the 2.5ε hard floor

    // diagnostics
    double beta = 0.5;   // modulus level defining the vortex region
    double t0 = 0.1;     // post-transient threshold for windowed checks
    std::vector<double> c_grid = {0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> eta_grid = {0.01, 0.02, 0.05, 0.1, 0.2};
    bool diag_decay = true;
    bool diag_monotonicity = true;
    bool diag_quantization = true;
    bool diag_brakke = true;
    bool diag_current = true;
    bool diag_clearing = false;  // ball-scan probe; costly, opt in

    // output
    std::string out_dir;     // empty → run_<preset> under the working directory
    int snapshot_every = 0;  // in samples; 0 → final state only
    bool write_images = false;

    std::uint64_t seed = 20260815ull;

    double h() const { return extent / sites; }
};

// Preset defaults (vacuum | planar_vortex | line_twisted | vortex_ring);
// unknown name throws listing the valid set.
RunConfig preset_config(const std::string& name);

// Applies one dotted key=value assignment.  Unknown keys throw naming the
// key; malformed values throw with the offending text.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Parses a key = value file ('#' comments, blank lines ignored; ':' accepted
// as separator).  The preset key is applied first so later keys override its
// defaults.  The result is validated; warnings (non-fatal) are appended.
RunConfig parse_config(const std::string& path, std::vector<std::string>* warnings = nullptr);

// Applies "key=value" strings on top of an existing config, then revalidates.
void apply_overrides(RunConfig& cfg, std::span<const std::string> overrides,
                     std::vector<std::string>* warnings = nullptr);

// Constraint checks (throws) returning non-fatal warnings: ε ≥ 2h with both
// values in the message, ring radius floors, preset-shape consistency.
std::vector<std::string> validate_config(const RunConfig& cfg);

// Canonical dotted-key echo of every field, for manifests and determinism
// comparisons.
std::map<std::string, std::string> config_entries(const RunConfig& cfg);
std::string serialize_config(const RunConfig& cfg);

}  // namespace higgsflow
