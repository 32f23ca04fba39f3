#pragma once

// Scenario orchestration: build the lattice and initial data for a preset,
// run the flow with full diagnostic recording, write the run directory
// (config echo, CSV series, snapshots, images, manifest), and compare
// matched runs across resolutions.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"

namespace higgsflow {

struct AcceptanceEntry {
    std::string name;
    double value = 0.0;
    bool pass = false;
    std::string note;
};

struct RunManifest {
    std::map<std::string, std::string> meta;  // config echo + run info + result summary
    std::vector<AcceptanceEntry> checks;
    std::string directory;
    bool aborted = false;

    bool all_pass() const;
};

// Runs one configured scenario.  The run directory receives config.txt,
// series.csv, per-diagnostic CSVs, snapshots, optional PGM slices, and
// manifest.txt (written atomically; on a flow abort a partial manifest with
// run.aborted = true is written before the abort propagates).
RunManifest run_preset(const RunConfig& cfg);

struct CompareReport {
    std::vector<std::string> manifest_paths;
    std::vector<double> eps_values;
    std::vector<int> sites_values;
    std::vector<double> max_xi_values;         // post-transient discrepancy maxima
    std::vector<double> equipartition_values;  // final equipartition integrals
    std::vector<double> density_ratio_values;  // final sup density ratios
    std::vector<double> decay_slope_values;    // mean post-transient decay slopes

    double uniformity_ratio = 0.0;  // max/min of the discrepancy maxima
    bool uniformity_pass = false;   // ratio ≤ 2
    std::vector<double> equipartition_ratios;  // finer/coarser, runs ordered coarse→fine
    double decay_slope_spread = 0.0;           // max/min of |slope|

    std::string text;  // printable table
};

// Cross-resolution trend tables from ≥ 2 manifests of the same scenario
// (same preset, degree, twist, extent, dimension; distinct (ε, sites) pairs).
// Mismatched scenarios throw naming the offending key.
CompareReport compare_runs(std::span<const std::string> manifest_paths);

}  // namespace higgsflow
